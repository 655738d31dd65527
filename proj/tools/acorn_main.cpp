#include "acorn/cli/commands.hpp"

int main(int argc, char** argv) { return acorn::cli::run_cli(argc, argv); }
