#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace slad::cli {

enum ExitCode : int {
  kOk = 0,
  kDataError = 1,
  kUsageError = 2,
  kIterationLimit = 3,
};

/// Entry point shared by the executable and the tests. `args` excludes the
/// program name.
int run_command(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace slad::cli
