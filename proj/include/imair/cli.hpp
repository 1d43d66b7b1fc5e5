#pragma once

#include <string>
#include <vector>

namespace imair {

/// Exit codes of the command-line tool.
enum ExitCode : int { kExitOk = 0, kExitUsage = 1, kExitData = 2, kExitInternal = 3 };

/// Runs one CLI invocation. `args` excludes the program name. Data goes to
/// files and stdout, progress lines to stderr.
int run_cli(const std::vector<std::string>& args);

}  // namespace imair
