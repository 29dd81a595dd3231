#ifndef DRN_TESTS_HELPERS_HPP
#define DRN_TESTS_HELPERS_HPP

#include "drn/distribution.hpp"
#include "drn/error.hpp"

#include <doctest.h>

#include <vector>

namespace drn::test {

inline BinnedDistribution random_distribution(const Support& support, Rng& rng) {
  std::uniform_real_distribution<double> u(0.05, 1.0);
  Vector raw(support.bins());
  for (auto& v : raw) v = u(rng);
  return normalize(raw, support);
}

inline std::vector<BinnedDistribution> random_distributions(int n, const Support& support, Rng& rng) {
  std::vector<BinnedDistribution> out;
  for (int i = 0; i < n; ++i) out.push_back(random_distribution(support, rng));
  return out;
}

inline BinnedDistribution from_masses(const Support& support, std::vector<double> m) {
  return BinnedDistribution(support, Eigen::Map<Vector>(m.data(), static_cast<Eigen::Index>(m.size())));
}

template <typename F>
ErrorCode error_code_of(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected drn::Error");
  return ErrorCode::InvalidArgument;
}

}  // namespace drn::test

#endif  // DRN_TESTS_HELPERS_HPP
