#include "cli.hpp"

int main(int argc, char** argv) { return giantpair::cli::run_cli(argc, argv); }
