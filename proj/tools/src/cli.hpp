#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace ocp::cli {

/// Exit codes; each failure class has its own.
enum ExitCode : int {
  kOk = 0,
  kInternal = 1,
  kUsage = 2,
  kConfig = 3,
  kBudget = 4,
  kContract = 5,
  kBracket = 6,
  kDivergence = 7,
};

/// Parses argv, runs one subcommand and writes its result to --out (stdout
/// when absent or "-"). Failures print a one-line JSON error record to `err`.
int cli_dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

int cli_dispatch(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace ocp::cli
