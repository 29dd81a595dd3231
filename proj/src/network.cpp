#include "drn/network.hpp"

#include "drn/error.hpp"

#include <numeric>

namespace drn {

NetworkSpec::NetworkSpec(std::vector<int> layer_sizes) : sizes_(std::move(layer_sizes)) {
  if (sizes_.size() < 2) {
    throw Error(ErrorCode::InvalidArgument, "network needs an input and an output layer");
  }
  for (int n : sizes_)
    if (n < 1) throw Error(ErrorCode::InvalidArgument, "layer sizes must be positive");
}

int count_params(const NetworkSpec& spec) {
  int total = 0;
  for (int l = 1; l < spec.layer_count(); ++l)
    total += spec.width(l) * (spec.width(l - 1) + kBiasParamCount);
  return total;
}

DrnNetwork::DrnNetwork(NetworkSpec spec, Support support) : spec_(std::move(spec)), support_(support) {
  for (int l = 1; l < spec_.layer_count(); ++l) {
    std::vector<NodeParams> layer(spec_.width(l));
    for (auto& node : layer) node.weights = Vector::Zero(spec_.width(l - 1));
    layers_.push_back(std::move(layer));
  }
}

Vector DrnNetwork::flatten() const {
  Vector out(count_params(spec_));
  Eigen::Index pos = 0;
  for (const auto& layer : layers_) {
    for (const auto& node : layer) {
      out.segment(pos, node.fan_in()) = node.weights;
      pos += node.fan_in();
      out(pos++) = node.bias.b_q;
      out(pos++) = node.bias.b_a;
      out(pos++) = node.bias.lambda_q;
      out(pos++) = node.bias.lambda_a;
    }
  }
  return out;
}

DrnNetwork DrnNetwork::unflatten(const NetworkSpec& spec, const Support& support, const Vector& params) {
  if (params.size() != count_params(spec)) {
    throw Error(ErrorCode::DimensionMismatch, "parameter vector length " + std::to_string(params.size()) +
                                                  " differs from " + std::to_string(count_params(spec)));
  }
  DrnNetwork net(spec, support);
  Eigen::Index pos = 0;
  for (auto& layer : net.layers_) {
    for (auto& node : layer) {
      node.weights = params.segment(pos, node.fan_in());
      pos += node.fan_in();
      node.bias.b_q = params(pos++);
      node.bias.b_a = params(pos++);
      node.bias.lambda_q = params(pos++);
      node.bias.lambda_a = params(pos++);
    }
  }
  return net;
}

std::vector<std::string> DrnNetwork::param_labels(const NetworkSpec& spec) {
  std::vector<std::string> labels;
  for (int l = 1; l < spec.layer_count(); ++l) {
    for (int k = 0; k < spec.width(l); ++k) {
      const std::string prefix = "L" + std::to_string(l) + ".N" + std::to_string(k) + ".";
      for (int i = 0; i < spec.width(l - 1); ++i) labels.push_back(prefix + "w" + std::to_string(i));
      for (const char* role : {"b_q", "b_a", "lambda_q", "lambda_a"}) labels.push_back(prefix + role);
    }
  }
  return labels;
}

Vector propagate_node(const NodeParams& node, std::span<const BinnedDistribution> incoming) {
  if (static_cast<int>(incoming.size()) != node.fan_in()) {
    throw Error(ErrorCode::FanInMismatch, "node expects " + std::to_string(node.fan_in()) + " inputs, got " +
                                              std::to_string(incoming.size()));
  }
  if (incoming.empty()) throw Error(ErrorCode::FanInMismatch, "node has no incoming connections");
  const Support& support = incoming.front().support();
  for (const auto& p : incoming)
    if (!(p.support() == support)) throw Error(ErrorCode::SupportMismatch, "incoming supports differ");

  const Matrix d2 = squared_distance_matrix(support);
  Vector out = bias_vector(node.bias, support);
  for (int i = 0; i < node.fan_in(); ++i)
    out.array() *= (transformation_matrix(node.weights(i), d2) * incoming[i].mass()).array();
  return out;
}

ForwardResult forward(const DrnNetwork& net, std::span<const BinnedDistribution> inputs) {
  const NetworkSpec& spec = net.spec();
  if (static_cast<int>(inputs.size()) != spec.input_count()) {
    throw Error(ErrorCode::FanInMismatch, "network expects " + std::to_string(spec.input_count()) +
                                              " inputs, got " + std::to_string(inputs.size()));
  }
  for (const auto& p : inputs)
    if (!(p.support() == net.support())) throw Error(ErrorCode::SupportMismatch, "input support differs");

  ForwardResult result;
  result.trace.activations.emplace_back(inputs.begin(), inputs.end());
  result.trace.pre_normalization_totals.emplace_back();
  for (int l = 1; l < spec.layer_count(); ++l) {
    const auto& previous = result.trace.activations.back();
    std::vector<BinnedDistribution> layer;
    std::vector<double> totals;
    for (int k = 0; k < spec.width(l); ++k) {
      const Vector raw = propagate_node(net.node(l, k), previous);
      const double total = raw.sum();
      if (!(total > 0.0) || !std::isfinite(total)) {
        throw Error(ErrorCode::NormalizationUnderflow,
                    "node " + std::to_string(k) + " of layer " + std::to_string(l) + " has total " +
                        std::to_string(total));
      }
      layer.emplace_back(net.support(), raw / total);
      totals.push_back(total);
    }
    result.trace.activations.push_back(std::move(layer));
    result.trace.pre_normalization_totals.push_back(std::move(totals));
  }
  result.outputs = result.trace.activations.back();
  return result;
}

}  // namespace drn
