#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace extrapolmv {

inline constexpr const char* kVersion = "0.1.0";

/// Exit codes shared by every subcommand.
enum ExitCode : int { kExitOk = 0, kExitError = 1, kExitWarning = 2 };

/// Runs `extrapolmv <subcommand> ...`; `args` excludes the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace extrapolmv
