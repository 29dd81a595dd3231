#include "drn/recurrent.hpp"

#include "drn/error.hpp"

namespace drn {

namespace {

void write_bias(Vector& out, Eigen::Index& pos, const BiasParams& b) {
  out(pos++) = b.b_q;
  out(pos++) = b.b_a;
  out(pos++) = b.lambda_q;
  out(pos++) = b.lambda_a;
}

BiasParams read_bias(const Vector& in, Eigen::Index& pos) {
  BiasParams b;
  b.b_q = in(pos++);
  b.b_a = in(pos++);
  b.lambda_q = in(pos++);
  b.lambda_a = in(pos++);
  return b;
}

BinnedDistribution normalize_activation(const Vector& raw, const Support& support) {
  const double total = raw.sum();
  if (!(total > 0.0) || !std::isfinite(total)) {
    throw Error(ErrorCode::NormalizationUnderflow, "recurrent node total is " + std::to_string(total));
  }
  return BinnedDistribution(support, raw / total);
}

}  // namespace

RdrnParams::RdrnParams(int n, int m, Support s)
    : inputs(n),
      hidden(m),
      U(Matrix::Zero(m, n)),
      W(Matrix::Zero(m, m)),
      hidden_bias(m),
      V(Vector::Zero(m)),
      support(s) {
  if (n < 1 || m < 1) throw Error(ErrorCode::InvalidArgument, "recurrent dimensions must be positive");
}

int rdrn_count_params(int n, int m) { return n * m + m * m + kBiasParamCount * m + m + kBiasParamCount; }

Vector RdrnParams::flatten() const {
  Vector out(rdrn_count_params(inputs, hidden));
  Eigen::Index pos = 0;
  for (int k = 0; k < hidden; ++k)
    for (int i = 0; i < inputs; ++i) out(pos++) = U(k, i);
  for (int k = 0; k < hidden; ++k)
    for (int j = 0; j < hidden; ++j) out(pos++) = W(k, j);
  for (const auto& b : hidden_bias) write_bias(out, pos, b);
  out.segment(pos, hidden) = V;
  pos += hidden;
  write_bias(out, pos, output_bias);
  return out;
}

RdrnParams RdrnParams::unflatten(int n, int m, const Support& support, const Vector& params) {
  if (params.size() != rdrn_count_params(n, m)) {
    throw Error(ErrorCode::DimensionMismatch, "recurrent parameter vector has wrong length");
  }
  RdrnParams out(n, m, support);
  Eigen::Index pos = 0;
  for (int k = 0; k < m; ++k)
    for (int i = 0; i < n; ++i) out.U(k, i) = params(pos++);
  for (int k = 0; k < m; ++k)
    for (int j = 0; j < m; ++j) out.W(k, j) = params(pos++);
  for (auto& b : out.hidden_bias) b = read_bias(params, pos);
  out.V = params.segment(pos, m);
  pos += m;
  out.output_bias = read_bias(params, pos);
  return out;
}

std::vector<std::string> RdrnParams::param_labels(int n, int m) {
  std::vector<std::string> labels;
  for (int k = 0; k < m; ++k)
    for (int i = 0; i < n; ++i) labels.push_back("U[" + std::to_string(k) + "," + std::to_string(i) + "]");
  for (int k = 0; k < m; ++k)
    for (int j = 0; j < m; ++j) labels.push_back("W[" + std::to_string(k) + "," + std::to_string(j) + "]");
  for (int k = 0; k < m; ++k)
    for (const char* role : {"b_q", "b_a", "lambda_q", "lambda_a"})
      labels.push_back("H" + std::to_string(k) + "." + role);
  for (int j = 0; j < m; ++j) labels.push_back("V[" + std::to_string(j) + "]");
  for (const char* role : {"b_q", "b_a", "lambda_q", "lambda_a"}) labels.push_back(std::string("out.") + role);
  return labels;
}

std::vector<BinnedDistribution> rdrn_step(const RdrnParams& params, std::span<const BinnedDistribution> inputs_t,
                                          std::span<const BinnedDistribution> hidden_prev) {
  if (static_cast<int>(inputs_t.size()) != params.inputs || static_cast<int>(hidden_prev.size()) != params.hidden) {
    throw Error(ErrorCode::DimensionMismatch, "recurrent step expects " + std::to_string(params.inputs) +
                                                  " inputs and " + std::to_string(params.hidden) + " hidden states");
  }
  std::vector<BinnedDistribution> incoming(inputs_t.begin(), inputs_t.end());
  incoming.insert(incoming.end(), hidden_prev.begin(), hidden_prev.end());
  for (const auto& p : incoming)
    if (!(p.support() == params.support)) throw Error(ErrorCode::SupportMismatch, "recurrent input support differs");

  std::vector<BinnedDistribution> next;
  for (int k = 0; k < params.hidden; ++k) {
    NodeParams node;
    node.weights.resize(params.inputs + params.hidden);
    node.weights << params.U.row(k).transpose(), params.W.row(k).transpose();
    node.bias = params.hidden_bias[k];
    next.push_back(normalize_activation(propagate_node(node, incoming), params.support));
  }
  return next;
}

BinnedDistribution rdrn_forward(const RdrnParams& params, const Sequence& sequence,
                                const std::optional<std::vector<BinnedDistribution>>& initial_hidden) {
  if (sequence.empty()) throw Error(ErrorCode::DimensionMismatch, "recurrent forward needs at least one step");
  std::vector<BinnedDistribution> hidden =
      initial_hidden ? *initial_hidden
                     : std::vector<BinnedDistribution>(params.hidden, BinnedDistribution::uniform(params.support));
  for (const auto& step : sequence) hidden = rdrn_step(params, step, hidden);

  NodeParams out;
  out.weights = params.V;
  out.bias = params.output_bias;
  return normalize_activation(propagate_node(out, hidden), params.support);
}

PropagationGraph make_rdrn_graph(int n, int m, int steps) {
  if (steps < 1) throw Error(ErrorCode::InvalidArgument, "recurrent graph needs at least one step");
  const int input_count = steps * n + m;
  const Eigen::Index w_offset = static_cast<Eigen::Index>(n) * m;
  const Eigen::Index bias_offset = w_offset + static_cast<Eigen::Index>(m) * m;
  const Eigen::Index v_offset = bias_offset + kBiasParamCount * m;
  const Eigen::Index out_bias = v_offset + m;

  std::vector<GraphNode> nodes;
  int previous = steps * n;  // value index of h^{t-1}_0
  for (int t = 0; t < steps; ++t) {
    const int first = input_count + static_cast<int>(nodes.size());
    for (int k = 0; k < m; ++k) {
      GraphNode node;
      for (int i = 0; i < n; ++i) node.edges.push_back({t * n + i, static_cast<Eigen::Index>(k) * n + i});
      for (int j = 0; j < m; ++j) node.edges.push_back({previous + j, w_offset + static_cast<Eigen::Index>(k) * m + j});
      node.bias_index = bias_offset + kBiasParamCount * k;
      nodes.push_back(std::move(node));
    }
    previous = first;
  }
  GraphNode output;
  for (int j = 0; j < m; ++j) output.edges.push_back({previous + j, v_offset + j});
  output.bias_index = out_bias;
  nodes.push_back(std::move(output));
  const int output_index = static_cast<int>(nodes.size()) - 1;
  return PropagationGraph(input_count, std::move(nodes), {output_index});
}

DrnNetwork unroll_rdrn(const RdrnParams& params, int steps) {
  const int n = params.inputs, m = params.hidden;
  const double q = params.support.bins();
  const double identity_weight = 1e4 * q * q;  // exp(-w / q^2) underflows to 0

  std::vector<int> sizes{m + steps * n};
  for (int t = 1; t <= steps; ++t) sizes.push_back(m + (steps - t) * n);
  sizes.push_back(1);
  DrnNetwork net(NetworkSpec(sizes), params.support);

  for (int t = 1; t <= steps; ++t) {
    // previous layer: [h^{t-1} (m), x^t (n), x^{t+1..T} ((T-t) n)]
    for (int k = 0; k < m; ++k) {
      NodeParams& node = net.node(t, k);
      node.weights.head(m) = params.W.row(k).transpose();
      node.weights.segment(m, n) = params.U.row(k).transpose();
      node.bias = params.hidden_bias[k];
    }
    for (int c = 0; c < (steps - t) * n; ++c) net.node(t, m + c).weights(m + n + c) = identity_weight;
  }
  NodeParams& out = net.node(steps + 1, 0);
  out.weights = params.V;
  out.bias = params.output_bias;
  return net;
}

}  // namespace drn
