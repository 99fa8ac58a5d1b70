#pragma once

#include <string>
#include <vector>

namespace tpe::cli {

enum ExitCode : int { kOk = 0, kUsage = 2, kData = 3, kDivergence = 4 };

/// Runs one subcommand. Errors are reported on stderr as a single JSON line
/// and mapped onto the exit codes above.
int run(int argc, const char* const* argv);
int run(const std::vector<std::string>& args);

} // namespace tpe::cli
