#include "gzf/cli.hpp"

int main(int argc, char** argv) { return gzf::run_cli(argc, argv); }
