#include "drn/checks.hpp"

#include "helpers.hpp"

#include <sstream>

using namespace drn;

TEST_CASE("all check suites pass") {
  const auto results = run_checks("all");
  CHECK(results.size() > 20);
  for (const auto& r : results) {
    INFO(r.suite << " " << r.name << " " << r.detail);
    CHECK(r.passed);
    CHECK(r.max_error <= r.tolerance);
  }
  CHECK(all_passed(results));

  std::ostringstream out;
  print_checks(out, results);
  CHECK(out.str().find("FAIL") == std::string::npos);
  CHECK(out.str().rfind("PASS oracle", 0) == 0);
}

TEST_CASE("suite selection") {
  for (const auto& r : run_checks("oracle")) CHECK(r.suite == "oracle");
  CHECK(test::error_code_of([] { run_checks("fuzz"); }) == ErrorCode::InvalidArgument);
}

TEST_CASE("corrupted gradient is reported with its component") {
  CheckOptions options;
  options.corrupt_gradient = [](Vector& g) { g(0) += 1.0; };
  const auto results = gradient_checks(options);
  REQUIRE(!results.empty());
  CHECK(!all_passed(results));
  const auto& first = results.front();
  CHECK(!first.passed);
  INFO(first.detail);
  CHECK(first.detail.find("L1.N0.w0") != std::string::npos);
}
