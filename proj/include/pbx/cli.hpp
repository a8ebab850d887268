#pragma once

#include <iosfwd>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "pbx/moments.hpp"

namespace pbx::cli {

/// Exit codes of `run`.
enum ExitCode : int {
  kOk = 0,
  kInputError = 1,
  kInfeasible = 2,
  /// `verify` found the solver and the oracle disagreeing.
  kMismatch = 3,
};

/// Malformed command line or job file.
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Payoff table over {0, ..., n}. Accepts a comma-separated list of n+1
/// numbers, `@path` naming a file with such a list (or a JSON array), or one
/// of the built-ins `tail:m` (indicator of x >= m), `point:m` (indicator of
/// x == m) and `identity`.
Payoff parse_payoff(std::string_view text, int n);

/// Comma-separated reals; whitespace around entries is ignored.
std::vector<double> parse_list(std::string_view text);

/// Parses argv (without the program name), runs the job and writes the report
/// to `out` and diagnostics to `err`. Returns one of ExitCode.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Worker threads requested through PB_EXTREMAL_THREADS; 0 if unset or invalid.
int threads_from_env();

}  // namespace pbx::cli
