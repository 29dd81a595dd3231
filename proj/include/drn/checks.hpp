#ifndef DRN_CHECKS_HPP
#define DRN_CHECKS_HPP

// Numerical property suites run with fixed seeds by the `check` command.

#include "drn/distribution.hpp"

#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

namespace drn {

struct CheckResult {
  std::string suite;
  std::string name;
  double max_error = 0.0;
  double tolerance = 0.0;
  bool passed = false;
  std::string detail;
};

struct CheckOptions {
  // Applied to every analytic gradient before comparison; lets tests verify
  // that gradcheck reports a corrupted component.
  std::function<void(Vector&)> corrupt_gradient;
};

// suite is one of "oracle", "props", "gradcheck", "all".
std::vector<CheckResult> run_checks(const std::string& suite, const CheckOptions& options = {});

std::vector<CheckResult> oracle_checks();
std::vector<CheckResult> property_checks();
std::vector<CheckResult> gradient_checks(const CheckOptions& options = {});

void print_checks(std::ostream& out, const std::vector<CheckResult>& results);
bool all_passed(const std::vector<CheckResult>& results);

}  // namespace drn

#endif  // DRN_CHECKS_HPP
