#include "restake/interface/cli.hpp"

int main(int argc, char** argv) { return restake::cli::run(argc, argv); }
