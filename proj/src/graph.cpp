#include "drn/graph.hpp"

#include "drn/error.hpp"

#include <cmath>
#include <limits>

namespace drn {

namespace {

double kl_term(double a, double m) { return a > 0.0 ? a * std::log(a / m) : 0.0; }

}  // namespace

PropagationGraph::PropagationGraph(int input_count, std::vector<GraphNode> nodes, std::vector<int> outputs)
    : inputs_(input_count), nodes_(std::move(nodes)), outputs_(std::move(outputs)) {
  if (input_count < 0) throw Error(ErrorCode::InvalidArgument, "negative input count");
  for (std::size_t k = 0; k < nodes_.size(); ++k) {
    if (nodes_[k].edges.empty()) throw Error(ErrorCode::InvalidArgument, "graph node without edges");
    for (const auto& e : nodes_[k].edges) {
      if (e.source < 0 || e.source >= input_count + static_cast<int>(k)) {
        throw Error(ErrorCode::InvalidArgument, "graph edge refers to a later or unknown value");
      }
    }
  }
  for (int o : outputs_)
    if (o < 0 || o >= static_cast<int>(nodes_.size()))
      throw Error(ErrorCode::InvalidArgument, "graph output index out of range");
}

PropagationGraph make_drn_graph(const NetworkSpec& spec) {
  std::vector<GraphNode> nodes;
  Eigen::Index pos = 0;
  int layer_start = 0;  // value index of first node in the previous layer
  for (int l = 1; l < spec.layer_count(); ++l) {
    for (int k = 0; k < spec.width(l); ++k) {
      GraphNode node;
      for (int i = 0; i < spec.width(l - 1); ++i) node.edges.push_back({layer_start + i, pos++});
      node.bias_index = pos;
      pos += kBiasParamCount;
      nodes.push_back(std::move(node));
    }
    layer_start += spec.width(l - 1);
  }
  std::vector<int> outputs;
  const int n = static_cast<int>(nodes.size());
  for (int k = 0; k < spec.output_count(); ++k) outputs.push_back(n - spec.output_count() + k);
  return PropagationGraph(spec.input_count(), std::move(nodes), std::move(outputs));
}

GraphEvaluator::GraphEvaluator(PropagationGraph graph, Support support)
    : graph_(std::move(graph)),
      support_(support),
      distance_profile_(squared_distance_profile(support.bins())),
      squared_distance_(squared_distance_matrix(support)),
      centers_(bin_centers(support)) {}

const Matrix& GraphEvaluator::value(int index, std::span<const Matrix> inputs,
                                   const std::vector<NodeCache>& cache) const {
  return index < graph_.input_count() ? inputs[index] : cache[index - graph_.input_count()].output;
}

void GraphEvaluator::run(const Vector& params, std::span<const Matrix> inputs, std::vector<NodeCache>& cache,
                         KernelCache& kernels, bool keep_factors) const {
  if (static_cast<int>(inputs.size()) != graph_.input_count()) {
    throw Error(ErrorCode::DimensionMismatch, "graph expects " + std::to_string(graph_.input_count()) +
                                                  " inputs, got " + std::to_string(inputs.size()));
  }
  const int q = support_.bins();
  const Eigen::Index cols = inputs.empty() ? 0 : inputs.front().cols();
  for (const auto& m : inputs)
    if (m.rows() != q || m.cols() != cols) throw Error(ErrorCode::DimensionMismatch, "input batch shape differs");

  kernels.clear();
  auto kernel = [&](Eigen::Index slot) -> const Matrix& {
    auto it = kernels.find(slot);
    if (it == kernels.end()) it = kernels.emplace(slot, transformation_matrix_from_profile(params(slot), distance_profile_)).first;
    return it->second;
  };

  cache.assign(graph_.nodes().size(), {});
  for (std::size_t k = 0; k < graph_.nodes().size(); ++k) {
    const GraphNode& node = graph_.nodes()[k];
    const Eigen::Index b = node.bias_index;
    const BiasParams bias{params(b), params(b + 1), params(b + 2), params(b + 3)};
    Matrix logits = log_bias_vector(bias, support_).replicate(1, cols);
    NodeCache& c = cache[k];
    for (const auto& e : node.edges) {
      Matrix factor = kernel(e.weight_index) * value(e.source, inputs, cache);
      Matrix log_factor = factor.array().log().matrix();
      logits += log_factor;
      if (keep_factors) {
        c.factors.push_back(std::move(factor));
        c.log_factors.push_back(std::move(log_factor));
      }
    }
    const Eigen::RowVectorXd peak = logits.colwise().maxCoeff();
    if (!peak.allFinite()) {
      throw Error(ErrorCode::NormalizationUnderflow,
                  "graph node " + std::to_string(k) + " has a vanishing or non-finite activation");
    }
    c.output = exp_flushed((logits.rowwise() - peak).array()).matrix();
    const Eigen::RowVectorXd total = c.output.colwise().sum();
    c.output.array().rowwise() /= total.array();
    c.log_total = peak + total.array().log().matrix();
  }
}

std::vector<Matrix> GraphEvaluator::evaluate(const Vector& params, std::span<const Matrix> inputs) const {
  std::vector<NodeCache> cache;
  KernelCache kernels;
  run(params, inputs, cache, kernels, false);
  std::vector<Matrix> out;
  for (int o : graph_.outputs()) out.push_back(std::move(cache[o].output));
  return out;
}

double GraphEvaluator::jsd_loss(const Vector& params, std::span<const Matrix> inputs, const Matrix& targets) const {
  if (graph_.outputs().size() != 1) throw Error(ErrorCode::DimensionMismatch, "JSD loss needs one output node");
  const auto out = evaluate(params, inputs);
  return jsd_columns(out.front(), targets).mean();
}

double GraphEvaluator::jsd_loss_and_gradient(const Vector& params, std::span<const Matrix> inputs,
                                             const Matrix& targets, Vector& gradient) const {
  if (graph_.outputs().size() != 1) throw Error(ErrorCode::DimensionMismatch, "JSD loss needs one output node");
  std::vector<NodeCache> cache;
  KernelCache kernels;
  run(params, inputs, cache, kernels, true);

  const int q = support_.bins();
  const int n_inputs = graph_.input_count();
  const auto cols = static_cast<double>(targets.cols());
  const Matrix& predicted = cache[graph_.outputs().front()].output;
  const double loss = jsd_columns(predicted, targets).mean();

  gradient = Vector::Zero(params.size());
  // d loss / d (normalized activation) per node
  std::vector<Matrix> upstream(graph_.nodes().size());
  upstream[graph_.outputs().front()] = jsd_gradient(predicted, targets) / cols;

  const double len = support_.length();
  for (auto k = static_cast<int>(graph_.nodes().size()) - 1; k >= 0; --k) {
    Matrix& g = upstream[k];
    if (g.size() == 0) continue;
    const GraphNode& node = graph_.nodes()[k];
    const NodeCache& c = cache[k];

    // Softmax backward: d loss / d logits = p ∘ residual.
    const Eigen::RowVectorXd centered = (g.array() * c.output.array()).colwise().sum();
    const Matrix residual = g.rowwise() - centered;
    const Vector row = (c.output.array() * residual.array()).rowwise().sum();

    const Eigen::Index b = node.bias_index;
    const double b_q = params(b), b_a = params(b + 1), lambda_q = params(b + 2), lambda_a = params(b + 3);
    const Eigen::ArrayXd u = (centers_.array() - lambda_q) / len;
    const Eigen::ArrayXd v = (centers_.array() - lambda_a) / len;
    gradient(b) += -(row.array() * u.square()).sum();
    gradient(b + 1) += -(row.array() * v.abs()).sum();
    gradient(b + 2) += (row.array() * (2.0 * b_q / len) * u).sum();
    gradient(b + 3) += (row.array() * (b_a / len) * v.sign()).sum();

    // d loss / d factor_e = exp(log B + sum_{j != e} log factor_j - log total) ∘ residual,
    // formed from prefix/suffix sums so a zero factor still gets its gradient.
    const std::size_t fan_in = node.edges.size();
    const BiasParams bias{b_q, b_a, lambda_q, lambda_a};
    Matrix prefix = (log_bias_vector(bias, support_).replicate(1, targets.cols())).rowwise() - c.log_total;
    std::vector<Matrix> suffix(fan_in + 1, Matrix::Zero(q, targets.cols()));
    for (std::size_t e = fan_in; e-- > 0;) suffix[e] = suffix[e + 1] + c.log_factors[e];

    for (std::size_t e = 0; e < fan_in; ++e) {
      const GraphEdge& edge = node.edges[e];
      const Matrix d_factor = (exp_flushed((prefix + suffix[e + 1]).array()) * residual.array()).matrix();
      prefix += c.log_factors[e];

      const Matrix& source = value(edge.source, inputs, cache);
      const Matrix& kernel = kernels.at(edge.weight_index);
      // d factor / d w = -(T ∘ D2) * source
      gradient(edge.weight_index) -=
          (d_factor.array() * ((kernel.array() * squared_distance_.array()).matrix() * source).array()).sum();
      if (edge.source >= n_inputs) {
        Matrix& target = upstream[edge.source - n_inputs];
        if (target.size() == 0) target = Matrix::Zero(q, targets.cols());
        target.noalias() += kernel * d_factor;  // T is symmetric
      }
    }
  }
  return loss;
}

Eigen::RowVectorXd jsd_columns(const Matrix& predicted, const Matrix& target) {
  if (predicted.rows() != target.rows() || predicted.cols() != target.cols()) {
    throw Error(ErrorCode::DimensionMismatch, "prediction and target batch shapes differ");
  }
  Eigen::RowVectorXd out(predicted.cols());
  for (Eigen::Index n = 0; n < predicted.cols(); ++n) {
    double total = 0.0;
    for (Eigen::Index i = 0; i < predicted.rows(); ++i) {
      const double p = predicted(i, n), t = target(i, n), m = 0.5 * (p + t);
      total += 0.5 * kl_term(p, m) + 0.5 * kl_term(t, m);
    }
    out(n) = total;
  }
  return out;
}

Matrix jsd_gradient(const Matrix& predicted, const Matrix& target) {
  Matrix g(predicted.rows(), predicted.cols());
  for (Eigen::Index n = 0; n < predicted.cols(); ++n) {
    for (Eigen::Index i = 0; i < predicted.rows(); ++i) {
      const double p = predicted(i, n);
      g(i, n) = p > 0.0 ? 0.5 * std::log(2.0 * p / (p + target(i, n))) : 0.0;
    }
  }
  return g;
}

}  // namespace drn
