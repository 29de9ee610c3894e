#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace sme::cli {

enum ExitCode : int { kOk = 0, kInfeasible = 1, kParseError = 2, kNumericFailure = 3 };

/// Runs one command line (without the program name). Output is buffered and
/// written to `out` once at the end; diagnostics go to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace sme::cli
