#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace caselab::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitIo = 3;
inline constexpr int kExitUpstream = 4;

/// Runs the `caselab` command line. `args` excludes the program name.
/// Returns the process exit code; never throws.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

std::string version();

} // namespace caselab::cli
