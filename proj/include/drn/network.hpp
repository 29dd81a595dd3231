#ifndef DRN_NETWORK_HPP
#define DRN_NETWORK_HPP

#include "drn/distribution.hpp"
#include "drn/kernels.hpp"

#include <span>
#include <string>
#include <vector>

namespace drn {

// Parameters of a single node: one weight per incoming connection plus bias.
struct NodeParams {
  Vector weights;
  BiasParams bias;

  int fan_in() const noexcept { return static_cast<int>(weights.size()); }
};

inline constexpr int kBiasParamCount = 4;

// Layer widths [n_0, n_1, ..., n_L, n_out]; entry 0 is the input layer.
class NetworkSpec {
 public:
  explicit NetworkSpec(std::vector<int> layer_sizes);

  const std::vector<int>& layer_sizes() const noexcept { return sizes_; }
  int layer_count() const noexcept { return static_cast<int>(sizes_.size()); }
  int width(int layer) const { return sizes_.at(layer); }
  int input_count() const noexcept { return sizes_.front(); }
  int output_count() const noexcept { return sizes_.back(); }

  friend bool operator==(const NetworkSpec&, const NetworkSpec&) = default;

 private:
  std::vector<int> sizes_;
};

int count_params(const NetworkSpec& spec);

class DrnNetwork {
 public:
  // Zero weights and zero biases.
  DrnNetwork(NetworkSpec spec, Support support);

  const NetworkSpec& spec() const noexcept { return spec_; }
  const Support& support() const noexcept { return support_; }

  // layer is 1-based over non-input layers.
  NodeParams& node(int layer, int index) { return layers_.at(layer - 1).at(index); }
  const NodeParams& node(int layer, int index) const { return layers_.at(layer - 1).at(index); }

  // Per node in layer order: weights, then b_q, b_a, lambda_q, lambda_a.
  Vector flatten() const;
  static DrnNetwork unflatten(const NetworkSpec& spec, const Support& support, const Vector& params);

  // Human-readable role of each flattened position, e.g. "L2.N3.w1" or "L1.N0.b_q".
  static std::vector<std::string> param_labels(const NetworkSpec& spec);

 private:
  NetworkSpec spec_;
  Support support_;
  std::vector<std::vector<NodeParams>> layers_;
};

// Unnormalized activation B_0 ∘ (T_{w_1} p_1) ∘ ... ∘ (T_{w_n} p_n).
Vector propagate_node(const NodeParams& node, std::span<const BinnedDistribution> incoming);

struct ForwardTrace {
  // activations[l][k]: normalized distribution of node k in layer l (layer 0 = inputs).
  std::vector<std::vector<BinnedDistribution>> activations;
  // totals[l][k]: sum of the unnormalized activation before normalization (empty for inputs).
  std::vector<std::vector<double>> pre_normalization_totals;
};

struct ForwardResult {
  std::vector<BinnedDistribution> outputs;
  ForwardTrace trace;

  const BinnedDistribution& output() const { return outputs.front(); }
};

ForwardResult forward(const DrnNetwork& net, std::span<const BinnedDistribution> inputs);

}  // namespace drn

#endif  // DRN_NETWORK_HPP
