#ifndef DRN_DATA_HPP
#define DRN_DATA_HPP

#include "drn/distribution.hpp"

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace drn {

using Sequence = std::vector<std::vector<BinnedDistribution>>;  // [t][k]

struct SequenceSample {
  Sequence inputs;
  BinnedDistribution target;
  // Generator-specific latent values (phase for shifting Gaussian, y and t0
  // for the OU task). Not serialized.
  std::vector<double> latent;
};

struct DatasetMeta {
  std::string generator = "unknown";
  std::uint64_t seed = 0;
  std::vector<std::pair<std::string, std::string>> params;

  std::optional<std::string> get(const std::string& key) const;
  void set(const std::string& key, const std::string& value);
};

class Dataset {
 public:
  Dataset(Support support, int steps, int nodes_per_step);

  // Throws ShapeMismatch / SupportMismatch on inhomogeneous samples.
  void add(SequenceSample sample);

  const Support& support() const noexcept { return support_; }
  int steps() const noexcept { return steps_; }
  int nodes_per_step() const noexcept { return nodes_; }
  std::size_t size() const noexcept { return samples_.size(); }
  bool empty() const noexcept { return samples_.empty(); }
  const std::vector<SequenceSample>& samples() const noexcept { return samples_; }
  const SequenceSample& operator[](std::size_t i) const { return samples_.at(i); }

  DatasetMeta meta;

 private:
  Support support_;
  int steps_;
  int nodes_;
  std::vector<SequenceSample> samples_;
};

// Columns are samples; inputs are ordered time-major, node-minor.
struct PackedBatch {
  std::vector<Matrix> inputs;
  Matrix targets;

  Eigen::Index size() const noexcept { return targets.cols(); }
};

PackedBatch pack(const Dataset& data);

// Keeps the last `steps` time steps of every sample.
Dataset truncate_history(const Dataset& data, int steps);
Dataset subset(const Dataset& data, std::size_t begin, std::size_t count);

struct ShiftingGaussianConfig {
  int samples = 20;
  int steps = 3;
  double dt = 0.2;
  double variance = 0.1;
  int bins = 100;
};

double shifting_gaussian_mean(double t);
Dataset gen_shifting_gaussian(const ShiftingGaussianConfig& config, Rng& rng);

inline constexpr double kOuDiffusion = 0.0013;
inline constexpr double kOuDrift = 2.86;
inline constexpr double kClimateDelta = 0.001;
inline constexpr double kClimateHorizon = 0.02;
inline constexpr int kClimateSteps = 5;

struct OuMoments {
  double mean;
  double variance;
};

OuMoments ou_moments(double y, double t);
Support climate_support(int bins = 100);
// Throws VarianceUnderflow when the variance is zero (t = 0).
BinnedDistribution ou_distribution(double y, double t, const Support& support);

Dataset gen_climate_ou_set(int samples, Rng& rng);
std::pair<Dataset, Dataset> gen_climate_ou(int train, int test, Rng& rng);

// Replaces every distribution by the histogram of n samples drawn from it.
Dataset degrade_with_sampling(const Dataset& data, int samples_per_distribution, Rng& rng);

struct GroupedDistribution {
  std::string group;
  BinnedDistribution distribution;
};

std::vector<GroupedDistribution> load_csv_samples(const std::filesystem::path& path, const Support& support,
                                                  const std::string& group_column, const std::string& value_column,
                                                  std::optional<double> bandwidth = std::nullopt);

// Sliding windows over an ordered series: `steps` consecutive inputs and the
// element `horizon` positions after the last input as target.
Dataset sequences_from_series(const std::vector<BinnedDistribution>& series, int steps, int horizon);

void write_dataset(std::ostream& out, const Dataset& data);
Dataset read_dataset(std::istream& in);
void save_dataset(const std::filesystem::path& path, const Dataset& data);
Dataset load_dataset(const std::filesystem::path& path);

}  // namespace drn

#endif  // DRN_DATA_HPP
