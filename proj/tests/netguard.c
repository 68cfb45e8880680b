/* Preloaded under the offline checks: any attempt to open an IP socket aborts the process. */
#define _GNU_SOURCE
#include <stdio.h>
#include <errno.h>
#include <stdlib.h>
#include <sys/socket.h>

int restake_netguard_active = 1;

static void refuse(const char* call, int family) {
  fprintf(stderr, "netguard: %s(family=%d) refused, networking is disabled\n", call, family);
  fflush(stderr);
  abort();
}

int socket(int domain, int type, int protocol) {
  (void)type;
  (void)protocol;
  if (domain != AF_UNIX) refuse("socket", domain);
  errno = EACCES;
  return -1;
}

int connect(int fd, const struct sockaddr* addr, socklen_t len) {
  (void)fd;
  (void)len;
  refuse("connect", addr ? addr->sa_family : -1);
  return -1;
}
