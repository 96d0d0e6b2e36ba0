#pragma once

// Command-line front end: msa validate | stiffness | solve.

#include <iosfwd>
#include <string>
#include <vector>

namespace msa::cli {

enum ExitCode : int {
  kOk = 0,
  kValidationError = 1,
  kParseError = 2,
  kSingularSystem = 3,
  kIllConditioned = 4,
  kSingularStiffness = 5,
  kUsageError = 6,
};

/// Runs one command. `args` excludes the program name. Reads MSA_THREADS
/// from the environment.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace msa::cli
