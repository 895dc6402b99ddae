#pragma once

#include <iosfwd>

namespace curvetac {

/// Exit codes of the command-line tool.
enum ExitCode : int { kExitOk = 0, kExitUsage = 1, kExitData = 2, kExitNumerical = 3 };

/// Entry point of the `curvetac` tool. Artifacts go to disk, summaries and
/// diagnostics to `err`, help text to `out`.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace curvetac
