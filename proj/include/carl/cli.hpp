#pragma once

#include <iosfwd>

namespace carl::cli {

enum ExitCode : int { kOk = 0, kFailure = 1, kUsage = 2, kDiverged = 3 };

/// Entry point for the `carl` tool. Subcommands: simulate, sweep, predict,
/// peaks, selftest. Returns the process exit code:
/// 0 success, 1 failed self-test, 2 config or usage error, 3 divergence.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

} // namespace carl::cli
