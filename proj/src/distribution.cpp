#include "drn/distribution.hpp"

#include "drn/error.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace drn {

namespace {

void require_same_support(const BinnedDistribution& p, const BinnedDistribution& q) {
  if (!(p.support() == q.support())) {
    throw Error(ErrorCode::SupportMismatch, "distributions are defined on different supports");
  }
}

double kl_term(double a, double m) { return a > 0.0 ? a * std::log(a / m) : 0.0; }

}  // namespace

Support::Support(double lower, double upper, int bins) : lower_(lower), upper_(upper), bins_(bins) {
  if (!std::isfinite(lower) || !std::isfinite(upper) || !(upper > lower)) {
    throw Error(ErrorCode::InvalidArgument, "support requires finite upper > lower");
  }
  if (bins < 2) throw Error(ErrorCode::InvalidArgument, "support requires at least 2 bins");
}

int Support::bin_index(double x) const {
  if (!contains(x)) {
    std::ostringstream os;
    os << "value " << x << " outside [" << lower_ << ", " << upper_ << "]";
    throw Error(ErrorCode::SampleOutOfSupport, os.str());
  }
  const auto idx = static_cast<int>(std::floor((x - lower_) / bin_width()));
  return std::clamp(idx, 0, bins_ - 1);
}

BinnedDistribution::BinnedDistribution(Support support, Vector mass)
    : support_(support), mass_(std::move(mass)) {
  if (mass_.size() != support_.bins()) {
    throw Error(ErrorCode::DimensionMismatch, "mass vector length differs from bin count");
  }
  if (!mass_.allFinite() || (mass_.array() < 0.0).any()) {
    throw Error(ErrorCode::InvalidArgument, "mass entries must be finite and non-negative");
  }
  if (std::abs(mass_.sum() - 1.0) > kSumTolerance) {
    throw Error(ErrorCode::InvalidArgument, "mass does not sum to one");
  }
}

BinnedDistribution BinnedDistribution::uniform(const Support& support) {
  return BinnedDistribution(support, Vector::Constant(support.bins(), 1.0 / support.bins()));
}

BinnedDistribution normalize(const Eigen::Ref<const Vector>& raw, const Support& support) {
  if (raw.size() != support.bins()) {
    throw Error(ErrorCode::DimensionMismatch, "raw vector length differs from bin count");
  }
  if (!raw.allFinite()) throw Error(ErrorCode::InvalidArgument, "raw vector has non-finite entries");
  const double total = raw.sum();
  if (!(total > 0.0) || (raw.array() < 0.0).any()) {
    throw Error(ErrorCode::NonPositiveTotal, "cannot normalize: total is non-positive or entries negative");
  }
  return BinnedDistribution(support, raw / total);
}

BinnedDistribution discretize_gaussian(double mean, double variance, const Support& support) {
  if (!(variance > 0.0)) throw Error(ErrorCode::InvalidArgument, "variance must be positive");
  const Vector centers = bin_centers(support);
  const Vector density = exp_flushed(-(centers.array() - mean).square() / (2.0 * variance));
  if (!(density.sum() > 0.0)) {
    throw Error(ErrorCode::DegenerateDensity, "Gaussian density underflows on every bin");
  }
  return BinnedDistribution(support, density / density.sum());
}

double jsd(const BinnedDistribution& p, const BinnedDistribution& q) {
  require_same_support(p, q);
  double total = 0.0;
  for (int i = 0; i < p.bins(); ++i) {
    const double m = 0.5 * (p[i] + q[i]);
    total += 0.5 * kl_term(p[i], m) + 0.5 * kl_term(q[i], m);
  }
  return total;
}

double l2_distance(const BinnedDistribution& p, const BinnedDistribution& q) {
  require_same_support(p, q);
  const double width = p.support().bin_width();
  return std::sqrt((p.density() - q.density()).squaredNorm() * width);
}

double nll(const BinnedDistribution& p, std::span<const double> samples) {
  const Support& support = p.support();
  double total = 0.0;
  for (double x : samples) {
    const int bin = support.bin_index(x);
    if (p[bin] <= 0.0) {
      throw Error(ErrorCode::ZeroDensityBin, "sample " + std::to_string(x) + " falls in zero-mass bin " +
                                                 std::to_string(bin));
    }
    total -= std::log(p[bin] / support.bin_width());
  }
  return total;
}

std::vector<double> sample(const BinnedDistribution& p, std::size_t n, Rng& rng) {
  const Support& support = p.support();
  std::vector<double> cumulative(p.bins());
  std::partial_sum(p.mass().begin(), p.mass().end(), cumulative.begin());
  int last_nonzero = p.bins() - 1;
  while (last_nonzero > 0 && p[last_nonzero] == 0.0) --last_nonzero;

  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<double> out;
  out.reserve(n);
  for (std::size_t j = 0; j < n; ++j) {
    const double u = unit(rng) * cumulative.back();
    auto it = std::upper_bound(cumulative.begin(), cumulative.end(), u);
    int bin = static_cast<int>(it - cumulative.begin());
    bin = std::min(bin, last_nonzero);
    const double left = support.lower() + bin * support.bin_width();
    double x = left + unit(rng) * support.bin_width();
    // keep the jitter inside the chosen bin despite rounding at the right edge
    x = std::clamp(x, left, std::nextafter(left + support.bin_width(), left));
    if (bin == p.bins() - 1) x = std::min(x, support.upper());
    out.push_back(x);
  }
  return out;
}

BinnedDistribution histogram_rebin(std::span<const double> samples, const Support& support) {
  if (samples.empty()) throw Error(ErrorCode::EmptySamples, "histogram of zero samples");
  Vector counts = Vector::Zero(support.bins());
  for (double x : samples) counts(support.bin_index(x)) += 1.0;
  return BinnedDistribution(support, counts / static_cast<double>(samples.size()));
}

double silverman_bandwidth(std::span<const double> samples) {
  if (samples.empty()) throw Error(ErrorCode::EmptySamples, "bandwidth of zero samples");
  const double n = static_cast<double>(samples.size());
  const double mean = std::accumulate(samples.begin(), samples.end(), 0.0) / n;
  double ss = 0.0;
  for (double x : samples) ss += (x - mean) * (x - mean);
  const double sd = samples.size() > 1 ? std::sqrt(ss / (n - 1.0)) : 0.0;
  if (!(sd > 0.0)) {
    throw Error(ErrorCode::ZeroVariance, "samples have zero variance; supply an explicit bandwidth");
  }
  return 1.06 * sd * std::pow(n, -0.2);
}

BinnedDistribution kde(std::span<const double> samples, const Support& support,
                       std::optional<double> bandwidth) {
  if (samples.empty()) throw Error(ErrorCode::EmptySamples, "kernel density of zero samples");
  const double h = bandwidth ? *bandwidth : silverman_bandwidth(samples);
  if (!(h > 0.0)) throw Error(ErrorCode::InvalidArgument, "bandwidth must be positive");
  const Vector centers = bin_centers(support);
  Vector density = Vector::Zero(support.bins());
  const double inv = 1.0 / (2.0 * h * h);
  for (double x : samples) density.array() += exp_flushed(-(centers.array() - x).square() * inv);
  if (!(density.sum() > 0.0)) {
    throw Error(ErrorCode::DegenerateDensity, "kernel density underflows on every bin");
  }
  return BinnedDistribution(support, density / density.sum());
}

}  // namespace drn
