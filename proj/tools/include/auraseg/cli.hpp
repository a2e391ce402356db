#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace auraseg::cli {

enum ExitCode : int {
  kSuccess = 0,
  kRuntimeFailure = 1,
  kUsage = 2,
};

/// Runs one command line (without the program name). Usage problems, including
/// config keys with values of the wrong type, return kUsage; library errors
/// during the run return kRuntimeFailure.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace auraseg::cli
