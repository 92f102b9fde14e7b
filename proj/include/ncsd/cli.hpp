#pragma once

#include <iosfwd>

namespace ncsd {

enum ExitCode : int {
  kExitOk = 0,
  kExitValidation = 1,
  kExitNumeric = 2,
  kExitViolation = 3,
};

/// Entry point of the ncsd command-line tool (solve, verify, bench,
/// check-bounds). Returns the process exit code.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace ncsd
