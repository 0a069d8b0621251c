#pragma once

#include <iosfwd>

namespace truncmean {

/// Exit codes of the command-line tool.
inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;    // numeric failure
inline constexpr int kExitConfig = 2;     // bad flag, config, rule or data
inline constexpr int kExitBudget = 3;     // plan refused by the draw budget

/// Runs the tool with the given arguments (argv[0] is the program name).
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace truncmean
