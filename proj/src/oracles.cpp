#include "drn/oracles.hpp"

#include "drn/error.hpp"

#include <cmath>

namespace drn {

namespace {

void check_incoming(const NodeParams& node, std::span<const BinnedDistribution> incoming, int max_fan_in,
                    int max_bins) {
  if (static_cast<int>(incoming.size()) != node.fan_in() || incoming.empty()) {
    throw Error(ErrorCode::FanInMismatch, "incoming count differs from node fan-in");
  }
  const Support& support = incoming.front().support();
  for (const auto& p : incoming)
    if (!(p.support() == support)) throw Error(ErrorCode::SupportMismatch, "incoming supports differ");
  if (node.fan_in() > max_fan_in || support.bins() > max_bins) {
    throw Error(ErrorCode::InstanceTooLarge, "fan-in " + std::to_string(node.fan_in()) + " with " +
                                                 std::to_string(support.bins()) + " bins exceeds oracle guard");
  }
}

// Advances a mixed-radix counter; returns false after the last combination.
bool next_index(std::vector<int>& idx, int radix) {
  for (auto& digit : idx) {
    if (++digit < radix) return true;
    digit = 0;
  }
  return false;
}

}  // namespace

Vector brute_force_node(const NodeParams& node, std::span<const BinnedDistribution> incoming) {
  check_incoming(node, incoming, kBruteForceMaxFanIn, kBruteForceMaxBins);
  const Support& support = incoming.front().support();
  const int q = support.bins();
  const int n = node.fan_in();
  const double len = support.length();
  const Vector s = bin_centers(support);
  const BiasParams& b = node.bias;

  Vector out = Vector::Zero(q);
  for (int target = 0; target < q; ++target) {
    std::vector<int> idx(n, 0);
    double sum = 0.0;
    do {
      double energy = b.b_q * std::pow((s(target) - b.lambda_q) / len, 2) +
                      b.b_a * std::abs((s(target) - b.lambda_a) / len);
      double prob = 1.0;
      for (int i = 0; i < n; ++i) {
        energy += node.weights(i) * std::pow((s(target) - s(idx[i])) / len, 2);
        prob *= incoming[i][idx[i]];
      }
      sum += std::exp(-energy) * prob;
    } while (next_index(idx, q));
    out(target) = sum;
  }
  return out;
}

Vector cross_term_expansion(const NodeParams& node, std::span<const BinnedDistribution> incoming) {
  check_incoming(node, incoming, kCrossTermMaxFanIn, kCrossTermMaxBins);
  const Support& support = incoming.front().support();
  const int q = support.bins();
  const int n = node.fan_in();

  std::vector<Matrix> t;
  for (int i = 0; i < n; ++i) t.push_back(transformation_matrix(node.weights(i), support));
  const Vector bias = bias_vector(node.bias, support);

  Vector out = Vector::Zero(q);
  for (int i = 0; i < q; ++i) {
    std::vector<int> idx(n, 0);
    do {
      double coefficient = bias(i);
      double cross = 1.0;
      for (int a = 0; a < n; ++a) {
        coefficient *= t[a](i, idx[a]);
        cross *= incoming[a][idx[a]];
      }
      out(i) += coefficient * cross;
    } while (next_index(idx, q));
  }
  return out;
}

BinnedDistribution linearized_node_output(const NodeParams& node, std::span<const BinnedDistribution> incoming) {
  if (static_cast<int>(incoming.size()) != node.fan_in() || incoming.empty()) {
    throw Error(ErrorCode::FanInMismatch, "incoming count differs from node fan-in");
  }
  const Support& support = incoming.front().support();
  const Matrix d2 = squared_distance_matrix(support);
  const Vector bias = bias_vector(node.bias, support);
  Vector raw = bias;
  for (int a = 0; a < node.fan_in(); ++a) {
    const Matrix linear_part = -node.weights(a) * d2;  // zero on the diagonal
    raw.array() += bias.array() * (linear_part * incoming[a].mass()).array();
  }
  return normalize(raw, support);
}

std::vector<BinnedDistribution> forward_unnormalized_hidden(const DrnNetwork& net,
                                                            std::span<const BinnedDistribution> inputs) {
  const NetworkSpec& spec = net.spec();
  if (static_cast<int>(inputs.size()) != spec.input_count()) {
    throw Error(ErrorCode::FanInMismatch, "input count differs from network input layer");
  }
  const Support& support = net.support();
  const Matrix d2 = squared_distance_matrix(support);

  // value = mantissa * exp(log_scale); mantissa is rescaled by its max only.
  struct Scaled {
    Vector mantissa;
    double log_scale;
  };
  std::vector<Scaled> previous;
  for (const auto& p : inputs) previous.push_back({p.mass(), 0.0});

  for (int l = 1; l < spec.layer_count(); ++l) {
    std::vector<Scaled> layer;
    for (int k = 0; k < spec.width(l); ++k) {
      const NodeParams& node = net.node(l, k);
      Scaled out{bias_vector(node.bias, support), 0.0};
      for (int i = 0; i < node.fan_in(); ++i) {
        Vector factor = transformation_matrix(node.weights(i), d2) * previous[i].mantissa;
        const double peak = factor.maxCoeff();
        if (!(peak > 0.0)) throw Error(ErrorCode::NormalizationUnderflow, "incoming factor vanished");
        out.mantissa.array() *= (factor / peak).array();
        out.log_scale += std::log(peak) + previous[i].log_scale;
      }
      const double peak = out.mantissa.maxCoeff();
      if (!(peak > 0.0)) throw Error(ErrorCode::NormalizationUnderflow, "activation vanished");
      out.mantissa /= peak;
      out.log_scale += std::log(peak);
      layer.push_back(std::move(out));
    }
    previous = std::move(layer);
  }

  std::vector<BinnedDistribution> outputs;
  for (const auto& v : previous) outputs.push_back(normalize(v.mantissa, support));
  return outputs;
}

}  // namespace drn
