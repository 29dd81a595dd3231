#ifndef DRN_DISTRIBUTION_HPP
#define DRN_DISTRIBUTION_HPP

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <random>
#include <span>
#include <vector>

namespace drn {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using Rng = std::mt19937_64;

// Compact interval [lower, upper] split into q equal-width bins.
class Support {
 public:
  Support(double lower, double upper, int bins);

  double lower() const noexcept { return lower_; }
  double upper() const noexcept { return upper_; }
  int bins() const noexcept { return bins_; }
  double length() const noexcept { return upper_ - lower_; }
  double bin_width() const noexcept { return (upper_ - lower_) / bins_; }

  bool contains(double x) const noexcept { return x >= lower_ && x <= upper_; }

  // Bins are half-open [edge_i, edge_{i+1}); the last bin is closed.
  int bin_index(double x) const;

  friend bool operator==(const Support&, const Support&) = default;

 private:
  double lower_;
  double upper_;
  int bins_;
};

// Element-wise exp with results below the normal range flushed to 0. Eigen's
// vectorized exp returns a denormal instead of 0 for very negative arguments.
template <typename Derived>
typename Derived::PlainObject exp_flushed(const Eigen::ArrayBase<Derived>& x) {
  using Scalar = typename Derived::Scalar;
  const Scalar cutoff = std::log(std::numeric_limits<Scalar>::min());
  const typename Derived::PlainObject arg = x;
  typename Derived::PlainObject out = arg.exp();  // select() over an exp expression is not vectorized
  return (arg < cutoff).select(Scalar(0), out);
}

template <typename Scalar = double>
Eigen::Matrix<Scalar, Eigen::Dynamic, 1> bin_centers(const Support& support) {
  const int q = support.bins();
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> centers(q);
  const Scalar lower = static_cast<Scalar>(support.lower());
  const Scalar width = static_cast<Scalar>(support.length()) / Scalar(q);
  for (int i = 0; i < q; ++i) centers(i) = lower + (Scalar(i) + Scalar(0.5)) * width;
  return centers;
}

// Probability mass function over the bins of a Support. Construction enforces
// non-negative mass summing to one within 1e-9.
class BinnedDistribution {
 public:
  static constexpr double kSumTolerance = 1e-9;

  BinnedDistribution(Support support, Vector mass);

  static BinnedDistribution uniform(const Support& support);

  const Support& support() const noexcept { return support_; }
  const Vector& mass() const noexcept { return mass_; }
  int bins() const noexcept { return support_.bins(); }
  double operator[](int i) const { return mass_(i); }

  // Piecewise-constant density values mass * q / length.
  Vector density() const { return mass_ / support_.bin_width(); }

 private:
  Support support_;
  Vector mass_;
};

BinnedDistribution normalize(const Eigen::Ref<const Vector>& raw, const Support& support);

// Gaussian evaluated pointwise at bin centers, truncated to the support and renormalized.
BinnedDistribution discretize_gaussian(double mean, double variance, const Support& support);

// Jensen-Shannon divergence in nats, bounded by ln 2.
double jsd(const BinnedDistribution& p, const BinnedDistribution& q);

// Function-space L2 distance between the piecewise-constant densities.
double l2_distance(const BinnedDistribution& p, const BinnedDistribution& q);

double nll(const BinnedDistribution& p, std::span<const double> samples);

std::vector<double> sample(const BinnedDistribution& p, std::size_t n, Rng& rng);

BinnedDistribution histogram_rebin(std::span<const double> samples, const Support& support);

// Gaussian kernel density estimate at the bin centers. Without a bandwidth,
// Silverman's rule 1.06 * sd * n^(-1/5) is used.
BinnedDistribution kde(std::span<const double> samples, const Support& support,
                       std::optional<double> bandwidth = std::nullopt);

double silverman_bandwidth(std::span<const double> samples);

}  // namespace drn

#endif  // DRN_DISTRIBUTION_HPP
