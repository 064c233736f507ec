#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace wante {

enum ExitCode : int {
  kExitOk = 0,
  kExitError = 1,
  kExitUsage = 2,          // unknown flag, missing or malformed argument
  kExitMissingFile = 3,
  kExitInvalidInput = 4,   // malformed or inconsistent input document
  kExitVerifyFailed = 5,   // congestion-free check found violations
  kExitSolveFailed = 6,
};

// Runs the command line `args` (without the program name). Results go to
// `out`, diagnostics to `err`.
int cli_main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace wante
