#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace omegarm {

enum ExitCode : int {
  kExitOk = 0,
  kExitInput = 1,      // unreadable, malformed or invalid model
  kExitParameter = 2,  // bad flag or out-of-range parameter
  kExitInternal = 3,   // a solver postcondition failed
};

/// Runs one command. args excludes the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace omegarm
