#pragma once

namespace fpp {

// Command-line entry point. Exit codes: 0 success (including --help),
// 1 argument or configuration error, 2 runtime failure.
int cli_main(int argc, const char* const* argv);

}  // namespace fpp
