#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace sparsewalk::cli {

enum ExitCode : int {
  kOk = 0,
  kRuntimeError = 1,
  kUsageError = 2,
  kDivergence = 3,
};

/// Environment variable that replaces the default output directory.
inline constexpr const char* kOutEnv = "SPARSEWALK_OUT";

/// Entry point of the `sparsewalk` executable.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace sparsewalk::cli
