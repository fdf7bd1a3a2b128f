#include "augbench/harness/cli.hpp"

int main(int argc, char** argv) { return augbench::cli_main(argc, argv); }
