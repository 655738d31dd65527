#pragma once

namespace acorn::cli {

// Exit codes: 0 ok, 1 config or usage error, 2 data or I/O error, 3 numeric failure.
int run_cli(int argc, char** argv);

}  // namespace acorn::cli
