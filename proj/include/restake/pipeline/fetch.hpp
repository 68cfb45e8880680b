#pragma once

#include <nlohmann/json.hpp>

#include "httplib.h"
// <resolv.h> defines _res, which collides with Eigen parameter names.
#ifdef _res
#undef _res
#endif

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdlib>
#include <ctime>
#include <exception>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "restake/core/date.hpp"
#include "restake/core/error.hpp"
#include "restake/core/hash.hpp"
#include "restake/core/io.hpp"
#include "restake/pipeline/series.hpp"

namespace restake::pipeline {

enum class TransportKind { GraphQuery, RestJson, LocalCsv };

inline const char* to_string(TransportKind t) {
  switch (t) {
    case TransportKind::GraphQuery: return "GraphQuery";
    case TransportKind::RestJson: return "RestJson";
    case TransportKind::LocalCsv: return "LocalCsv";
  }
  return "?";
}

inline TransportKind parse_transport(const std::string& s) {
  if (s == "GraphQuery") return TransportKind::GraphQuery;
  if (s == "RestJson") return TransportKind::RestJson;
  if (s == "LocalCsv") return TransportKind::LocalCsv;
  throw ValidationError("unknown transport '" + s + "' (expected GraphQuery, RestJson or LocalCsv)");
}

/// Where the records sit in a JSON response and which fields hold date and value.
struct ResponseMapping {
  std::string records_path;  ///< dot path, e.g. "data.financialsDailySnapshots"
  std::string date_field = "date";
  std::string value_field = "value";  ///< dot paths within a record
  bool unix_dates = false;
  double scale = 1.0;  ///< multiplies every parsed value
};

struct SourceDescriptor {
  std::string source_id;
  TransportKind transport = TransportKind::LocalCsv;
  /// URL for remote transports, file path for LocalCsv.
  std::string endpoint_or_path;
  /// GraphQL document for GraphQuery; ignored otherwise.
  std::string query;
  /// Query-string parameters (RestJson) or GraphQL variables (GraphQuery).
  nlohmann::json params = nlohmann::json::object();
  std::string cache_key;
  std::string series_name;
  std::string units;
  /// Request headers; `${VAR}` expands from the environment at send time.
  std::map<std::string, std::string> headers;
  /// LocalCsv: value column to read; defaults to series_name.
  std::string column;
  ResponseMapping mapping;

  void validate() const {
    if (source_id.empty()) throw ValidationError("source descriptor: source_id is empty");
    if (series_name.empty()) throw ValidationError("source '" + source_id + "': series_name is empty");
    if (endpoint_or_path.empty())
      throw ValidationError("source '" + source_id + "': endpoint_or_path is empty");
    if (transport != TransportKind::LocalCsv) {
      if (cache_key.empty()) throw ValidationError("source '" + source_id + "': cache_key is empty");
      if (endpoint_or_path.rfind("http://", 0) != 0 && endpoint_or_path.rfind("https://", 0) != 0)
        throw ValidationError("source '" + source_id + "': endpoint must be an http(s) URL");
      if (transport == TransportKind::GraphQuery && query.empty())
        throw ValidationError("source '" + source_id + "': GraphQuery needs a query document");
    }
    if (!params.is_object()) throw ValidationError("source '" + source_id + "': params must be an object");
  }
};

inline SourceDescriptor descriptor_from_json(const nlohmann::json& j) {
  SourceDescriptor d;
  try {
    d.source_id = j.at("source_id").get<std::string>();
    d.transport = parse_transport(j.at("transport").get<std::string>());
    d.endpoint_or_path = j.at("endpoint_or_path").get<std::string>();
    d.query = j.value("query", "");
    d.params = j.value("params", nlohmann::json::object());
    d.cache_key = j.value("cache_key", "");
    d.series_name = j.at("series_name").get<std::string>();
    d.units = j.value("units", "");
    d.column = j.value("column", "");
    d.headers = j.value("headers", std::map<std::string, std::string>{});
    if (j.contains("mapping")) {
      const auto& m = j.at("mapping");
      d.mapping.records_path = m.value("records_path", "");
      d.mapping.date_field = m.value("date_field", "date");
      d.mapping.value_field = m.value("value_field", "value");
      const auto fmt = m.value("date_format", "iso");
      if (fmt != "iso" && fmt != "unix")
        throw ValidationError("source '" + d.source_id + "': date_format must be iso or unix");
      d.mapping.unix_dates = fmt == "unix";
      d.mapping.scale = m.value("scale", 1.0);
    }
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("malformed source descriptor: ") + e.what());
  }
  d.validate();
  return d;
}

inline nlohmann::json to_json(const SourceDescriptor& d) {
  nlohmann::json j{{"source_id", d.source_id},
                   {"transport", to_string(d.transport)},
                   {"endpoint_or_path", d.endpoint_or_path},
                   {"series_name", d.series_name},
                   {"units", d.units}};
  if (!d.query.empty()) j["query"] = d.query;
  if (!d.params.empty()) j["params"] = d.params;
  if (!d.cache_key.empty()) j["cache_key"] = d.cache_key;
  if (!d.column.empty()) j["column"] = d.column;
  if (!d.headers.empty()) j["headers"] = d.headers;
  if (d.transport != TransportKind::LocalCsv)
    j["mapping"] = {{"records_path", d.mapping.records_path},
                    {"date_field", d.mapping.date_field},
                    {"value_field", d.mapping.value_field},
                    {"date_format", d.mapping.unix_dates ? "unix" : "iso"},
                    {"scale", d.mapping.scale}};
  return j;
}

/// Loads one descriptor; a relative LocalCsv path resolves against the file's directory.
inline SourceDescriptor load_descriptor(const std::filesystem::path& path) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(read_file(path));
  } catch (const nlohmann::json::parse_error& e) {
    throw DataError(path.string() + ": " + e.what());
  }
  auto d = descriptor_from_json(j);
  if (d.transport == TransportKind::LocalCsv && std::filesystem::path(d.endpoint_or_path).is_relative())
    d.endpoint_or_path = (path.parent_path() / d.endpoint_or_path).lexically_normal().string();
  return d;
}

// ---------------------------------------------------------------- transport

struct HttpRequest {
  std::string method = "GET";
  std::string url;  ///< scheme://host[:port]/path?query
  std::string body;
  std::string content_type;
  std::map<std::string, std::string> headers;

  std::string host() const {
    const auto start = url.find("://");
    const auto from = start == std::string::npos ? 0 : start + 3;
    return url.substr(from, url.find('/', from) - from);
  }
};

struct HttpResponse {
  int status = 0;
  std::string body;
};

/// Sends one request. Throws NetworkError when no response was received.
class HttpTransport {
 public:
  virtual ~HttpTransport() = default;
  virtual HttpResponse send(const HttpRequest& request) = 0;
};

class HttplibTransport final : public HttpTransport {
 public:
  explicit HttplibTransport(std::chrono::seconds timeout = std::chrono::seconds(30)) : timeout_(timeout) {}

  HttpResponse send(const HttpRequest& request) override {
    const auto scheme_end = request.url.find("://");
    if (scheme_end == std::string::npos) throw NetworkError("not a URL: '" + request.url + "'");
    const auto path_start = request.url.find('/', scheme_end + 3);
    const std::string origin = request.url.substr(0, path_start);
    const std::string target = path_start == std::string::npos ? "/" : request.url.substr(path_start);

    httplib::Client client(origin);
    client.set_connection_timeout(timeout_);
    client.set_read_timeout(timeout_);
    client.set_follow_location(true);
    const httplib::Headers headers(request.headers.begin(), request.headers.end());
    httplib::Result res = request.method == "POST"
                              ? client.Post(target, headers, request.body,
                                            request.content_type.empty() ? "application/json"
                                                                         : request.content_type)
                              : client.Get(target, headers);
    if (!res)
      throw NetworkError(request.method + " " + request.url + " failed: " + httplib::to_string(res.error()));
    return {res->status, res->body};
  }

 private:
  std::chrono::seconds timeout_;
};

struct RetryPolicy {
  int max_attempts = 4;
  std::chrono::milliseconds base_delay{250};
  std::chrono::milliseconds max_delay{4000};

  /// Delay before attempt `attempt + 1` (attempt counts from 1).
  std::chrono::milliseconds delay_after(int attempt) const {
    auto d = base_delay;
    for (int i = 1; i < attempt && d < max_delay; ++i) d *= 2;
    return std::min(d, max_delay);
  }
};

using Sleeper = std::function<void(std::chrono::milliseconds)>;

inline Sleeper real_sleeper() {
  return [](std::chrono::milliseconds d) { std::this_thread::sleep_for(d); };
}

inline bool retryable_status(int status) { return status == 429 || (status >= 500 && status < 600); }

/// Sends with bounded exponential backoff on transport failures, 429 and 5xx.
/// Other non-2xx statuses fail immediately.
inline HttpResponse send_with_retry(HttpTransport& transport, const HttpRequest& request,
                                    const RetryPolicy& policy, const Sleeper& sleep) {
  std::string last_error;
  for (int attempt = 1; attempt <= policy.max_attempts; ++attempt) {
    std::optional<HttpResponse> res;
    try {
      res = transport.send(request);
    } catch (const NetworkError& e) {
      last_error = e.what();
    }
    if (res) {
      if (res->status >= 200 && res->status < 300) return *res;
      last_error = "HTTP " + std::to_string(res->status) + " from " + request.url;
      if (!retryable_status(res->status)) throw NetworkError(last_error);
    }
    if (attempt < policy.max_attempts) sleep(policy.delay_after(attempt));
  }
  throw NetworkError(last_error + " (gave up after " + std::to_string(policy.max_attempts) + " attempts)");
}

/// Replaces each `${NAME}` with the environment value (empty when unset).
inline std::string expand_env(const std::string& text) {
  std::string out;
  std::size_t pos = 0;
  while (pos < text.size()) {
    const auto open = text.find("${", pos);
    const auto close = open == std::string::npos ? open : text.find('}', open);
    if (close == std::string::npos) {
      out += text.substr(pos);
      break;
    }
    out += text.substr(pos, open - pos);
    const char* v = std::getenv(text.substr(open + 2, close - open - 2).c_str());
    out += v ? v : "";
    pos = close + 1;
  }
  return out;
}

inline HttpRequest build_request(const SourceDescriptor& d) {
  HttpRequest req;
  for (const auto& [k, v] : d.headers) req.headers[k] = expand_env(v);
  if (d.transport == TransportKind::GraphQuery) {
    req.method = "POST";
    req.url = expand_env(d.endpoint_or_path);
    req.content_type = "application/json";
    req.body = nlohmann::json{{"query", d.query}, {"variables", d.params}}.dump();
    return req;
  }
  req.url = expand_env(d.endpoint_or_path);
  httplib::Params params;
  for (const auto& [k, v] : d.params.items()) params.emplace(k, v.is_string() ? v.get<std::string>() : v.dump());
  if (!params.empty())
    req.url += (req.url.find('?') == std::string::npos ? "?" : "&") + httplib::detail::params_to_query_str(params);
  return req;
}

// ---------------------------------------------------------------- payloads

namespace detail {

inline const nlohmann::json& walk_path(const nlohmann::json& root, const std::string& path,
                                       const std::string& source) {
  const nlohmann::json* node = &root;
  std::size_t pos = 0;
  while (pos < path.size()) {
    const auto dot = path.find('.', pos);
    const std::string key = path.substr(pos, dot == std::string::npos ? std::string::npos : dot - pos);
    pos = dot == std::string::npos ? path.size() : dot + 1;
    if (node->is_object() && node->contains(key)) {
      node = &(*node)[key];
    } else if (node->is_array() && !key.empty() &&
               std::all_of(key.begin(), key.end(), [](char c) { return c >= '0' && c <= '9'; }) &&
               std::stoul(key) < node->size()) {
      node = &(*node)[std::stoul(key)];
    } else {
      throw DataError("source '" + source + "': response has no '" + key + "' along '" + path + "'");
    }
  }
  return *node;
}

inline double json_number(const nlohmann::json& v, const std::string& context) {
  if (v.is_number()) return v.get<double>();
  if (v.is_string()) return parse_double(v.get<std::string>(), context);
  throw DataError(context + ": expected a number");
}

inline Date json_date(const nlohmann::json& v, bool unix_dates, const std::string& context) {
  if (unix_dates) return Date::from_unix_seconds(static_cast<long long>(json_number(v, context)));
  if (!v.is_string()) throw DataError(context + ": expected an ISO date string");
  const auto s = v.get<std::string>();
  return Date::parse(s.substr(0, 10));
}

}  // namespace detail

/// Maps a JSON response body onto a series per the descriptor's mapping.
inline RawSeries parse_payload(const SourceDescriptor& d, const std::string& body,
                               const std::string& retrieved_at) {
  nlohmann::json root;
  try {
    root = nlohmann::json::parse(body);
  } catch (const nlohmann::json::parse_error& e) {
    throw DataError("source '" + d.source_id + "': response is not JSON: " + e.what());
  }
  if (root.is_object() && root.contains("errors") && d.transport == TransportKind::GraphQuery)
    throw DataError("source '" + d.source_id + "': query returned errors: " + root["errors"].dump());
  const auto& records = detail::walk_path(root, d.mapping.records_path, d.source_id);
  if (!records.is_array()) throw DataError("source '" + d.source_id + "': records are not an array");
  RawSeries s{d.series_name, {}, d.units, retrieved_at};
  for (std::size_t i = 0; i < records.size(); ++i) {
    const auto& r = records[i];
    const std::string ctx = "source '" + d.source_id + "' record " + std::to_string(i);
    if (!r.is_object()) throw DataError(ctx + ": record is not an object");
    s.add(detail::json_date(detail::walk_path(r, d.mapping.date_field, d.source_id), d.mapping.unix_dates, ctx),
          d.mapping.scale * detail::json_number(detail::walk_path(r, d.mapping.value_field, d.source_id), ctx));
  }
  return s;
}

// ---------------------------------------------------------------- cache

inline std::filesystem::path default_cache_dir() {
  if (const char* env = std::getenv("RESTAKE_CACHE_DIR"); env && *env) return env;
  return ".restake-cache";
}

struct CacheEntry {
  std::string object;  ///< sha256 of the stored body
  std::string source_id;
  std::string url;
  std::string retrieved_at;
};

/// Content-addressed body store: objects/<sha256>.json plus manifest.json
/// mapping cache keys to objects. Entries are only replaced on explicit refresh.
class Cache {
 public:
  explicit Cache(std::filesystem::path root = default_cache_dir()) : root_(std::move(root)) {}

  const std::filesystem::path& root() const noexcept { return root_; }

  std::optional<CacheEntry> lookup(const std::string& key) const {
    std::lock_guard lock(mu_);
    const auto manifest = read_manifest();
    if (!manifest.contains(key)) return std::nullopt;
    const auto& e = manifest[key];
    return CacheEntry{e.value("object", ""), e.value("source_id", ""), e.value("url", ""),
                      e.value("retrieved_at", "")};
  }

  std::string body(const CacheEntry& e) const { return read_file(object_path(e.object)); }

  CacheEntry store(const std::string& key, const std::string& source_id, const std::string& url,
                   const std::string& body, const std::string& retrieved_at) {
    std::lock_guard lock(mu_);
    CacheEntry e{sha256_hex(body), source_id, url, retrieved_at};
    if (!std::filesystem::exists(object_path(e.object))) write_file_atomic(object_path(e.object), body);
    auto manifest = read_manifest();
    manifest[key] = {{"object", e.object}, {"source_id", source_id}, {"url", url}, {"retrieved_at", retrieved_at}};
    write_file_atomic(root_ / "manifest.json", manifest.dump(2) + "\n");
    return e;
  }

 private:
  std::filesystem::path object_path(const std::string& object) const {
    return root_ / "objects" / (object + ".json");
  }

  nlohmann::json read_manifest() const {
    const auto path = root_ / "manifest.json";
    if (!std::filesystem::exists(path)) return nlohmann::json::object();
    try {
      auto j = nlohmann::json::parse(read_file(path));
      if (!j.is_object()) throw DataError("cache manifest is not an object");
      return j;
    } catch (const nlohmann::json::parse_error& e) {
      throw DataError("corrupt cache manifest '" + path.string() + "': " + e.what());
    }
  }

  std::filesystem::path root_;
  mutable std::mutex mu_;
};

// ---------------------------------------------------------------- fetching

inline std::string utc_now_iso() {
  const std::time_t t = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

struct FetchOptions {
  bool offline = false;
  bool refresh = false;  ///< refetch even when cached
  std::filesystem::path cache_dir = default_cache_dir();
  std::shared_ptr<HttpTransport> transport = std::make_shared<HttplibTransport>();
  RetryPolicy retry;
  Sleeper sleep = real_sleeper();
  std::function<std::string()> clock = utc_now_iso;
  std::size_t max_parallel = 4;
  std::chrono::milliseconds politeness{250};  ///< minimum gap between requests to one host
};

namespace detail {

class HostThrottle {
 public:
  explicit HostThrottle(std::chrono::milliseconds gap) : gap_(gap) {}

  void wait(const std::string& host, const Sleeper& sleep) {
    std::chrono::milliseconds pause{0};
    {
      std::lock_guard lock(mu_);
      const auto now = std::chrono::steady_clock::now();
      auto& next = next_[host];
      if (next > now) pause = std::chrono::duration_cast<std::chrono::milliseconds>(next - now);
      next = std::max(next, now) + gap_;
    }
    if (pause.count() > 0) sleep(pause);
  }

 private:
  std::chrono::milliseconds gap_;
  std::mutex mu_;
  std::map<std::string, std::chrono::steady_clock::time_point> next_;
};

inline RawSeries fetch_one(const SourceDescriptor& d, const FetchOptions& opt, Cache& cache,
                           HostThrottle* throttle) {
  d.validate();
  if (d.transport == TransportKind::LocalCsv) {
    auto s = raw_series_from_csv(read_file(d.endpoint_or_path), d.column.empty() ? d.series_name : d.column,
                                 d.endpoint_or_path);
    s.series_name = d.series_name;
    s.units = d.units;
    return s;
  }
  if (!opt.refresh || opt.offline) {
    if (auto hit = cache.lookup(d.cache_key)) return parse_payload(d, cache.body(*hit), hit->retrieved_at);
    if (opt.offline)
      throw CacheMissError("offline: no cached copy of '" + d.source_id + "' (cache key '" + d.cache_key +
                           "' in " + cache.root().string() + ")");
  }
  const auto req = build_request(d);
  if (throttle) throttle->wait(req.host(), opt.sleep);
  const auto res = send_with_retry(*opt.transport, req, opt.retry, opt.sleep);
  const auto at = opt.clock();
  auto series = parse_payload(d, res.body, at);
  cache.store(d.cache_key, d.source_id, d.endpoint_or_path, res.body, at);
  return series;
}

}  // namespace detail

inline RawSeries fetch_series(const SourceDescriptor& d, const FetchOptions& opt = {}) {
  Cache cache(opt.cache_dir);
  return detail::fetch_one(d, opt, cache, nullptr);
}

/// Fetches every descriptor with at most `max_parallel` in flight. Results
/// are in input order; the first failure (by index) is rethrown.
inline std::vector<RawSeries> fetch_all(const std::vector<SourceDescriptor>& ds, const FetchOptions& opt = {}) {
  Cache cache(opt.cache_dir);
  detail::HostThrottle throttle(opt.politeness);
  std::vector<RawSeries> out(ds.size());
  std::vector<std::exception_ptr> errors(ds.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < ds.size(); i = next++) {
      try {
        out[i] = detail::fetch_one(ds[i], opt, cache, &throttle);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const std::size_t n_threads = std::clamp<std::size_t>(opt.max_parallel, 1, std::max<std::size_t>(ds.size(), 1));
  std::vector<std::thread> pool;
  for (std::size_t t = 1; t < n_threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
  return out;
}

}  // namespace restake::pipeline
