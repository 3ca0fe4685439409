#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace chemo::cli {

enum ExitCode : int {
  kOk = 0,
  kAuditFail = 1,
  kConfigError = 2,
  kDataError = 3,
  kInfeasible = 4,
};

/// Entry point shared by the executable and the tests. `args` excludes the
/// program name. Progress goes to `out`, diagnostics to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace chemo::cli
