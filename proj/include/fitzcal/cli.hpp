#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace fitzcal {

// Exit codes of the fitzcal executable.
enum ExitCode : int {
  kExitOk = 0,
  kExitUsage = 1,
  kExitData = 2,
  kExitInternal = 3,
};

// Runs one CLI invocation. args[0] is the program name. Errors are written
// to `err` as "fitzcal: <category>: <message>".
int run_cli(const std::vector<std::string>& args, std::ostream& out,
            std::ostream& err);

}  // namespace fitzcal
