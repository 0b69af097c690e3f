#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace hist4lt::cli {

enum ExitCode : int {
  kOk = 0,
  kUsage = 2,
  kIo = 3,
  kInvariant = 4,
};

// Runs one command line (args[0] is the program name). Normal output goes to `out`,
// diagnostics to `err`; the return value is one of ExitCode.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace hist4lt::cli
