#pragma once

#include <ostream>

namespace shapinf::cli {

/// Exit codes of the shapinf tool.
enum ExitCode : int { kOk = 0, kIoError = 1, kConfigError = 2 };

/// Runs the command line and returns the exit code. Reports go to `out` (or
/// to --out), diagnostics to `err`.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace shapinf::cli
