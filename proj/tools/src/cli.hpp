#pragma once

#include <string>
#include <vector>

namespace patch_triage::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitData = 2;

/// Runs the patch_triage command line; `args` excludes the program name.
/// Returns the process exit code. Logs go to standard error only.
int run(const std::vector<std::string>& args);

}  // namespace patch_triage::cli
