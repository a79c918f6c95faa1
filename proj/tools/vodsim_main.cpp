#include "vodsim/cli.hpp"

int main(int argc, char** argv) { return vodsim::cli::run_cli(argc, argv); }
