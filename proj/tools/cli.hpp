#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace dnaplan::cli {

inline constexpr const char* kToolVersion = "0.3.0";

enum ExitCode : int {
  kOk = 0,
  kFailure = 1,
  kUsage = 2,
  kInvalidInput = 3,
  kInfeasible = 4,
};

/// Runs one command; `args` excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace dnaplan::cli
