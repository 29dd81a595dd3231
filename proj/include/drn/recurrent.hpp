#ifndef DRN_RECURRENT_HPP
#define DRN_RECURRENT_HPP

#include "drn/graph.hpp"
#include "drn/network.hpp"

#include <optional>
#include <span>
#include <string>
#include <vector>

namespace drn {

// Recurrent DRN with one hidden layer of m distributions per time step.
// U (m x n) and W (m x m) connect the current inputs and previous hidden state
// to each hidden node; hidden biases are shared across time steps. V connects
// the final hidden state to the single output node.
struct RdrnParams {
  RdrnParams(int inputs, int hidden, Support support);

  int inputs;
  int hidden;
  Matrix U;
  Matrix W;
  std::vector<BiasParams> hidden_bias;
  Vector V;
  BiasParams output_bias;
  Support support;

  // U row-major, W row-major, hidden biases (4 per node), V, output bias.
  Vector flatten() const;
  static RdrnParams unflatten(int inputs, int hidden, const Support& support, const Vector& params);
  static std::vector<std::string> param_labels(int inputs, int hidden);
};

int rdrn_count_params(int inputs, int hidden);

using Sequence = std::vector<std::vector<BinnedDistribution>>;  // [t][i]

std::vector<BinnedDistribution> rdrn_step(const RdrnParams& params, std::span<const BinnedDistribution> inputs_t,
                                          std::span<const BinnedDistribution> hidden_prev);

// Initial hidden state defaults to m uniform distributions.
BinnedDistribution rdrn_forward(const RdrnParams& params, const Sequence& sequence,
                                const std::optional<std::vector<BinnedDistribution>>& initial_hidden = std::nullopt);

// Graph over inputs [x^1_1..x^1_n, ..., x^T_1..x^T_n, h^0_1..h^0_m] with tied slots.
PropagationGraph make_rdrn_graph(int inputs, int hidden, int steps);

// Feedforward DRN equivalent to T recurrent steps. Its input layer is
// [h^0 (m), x^1 (n), ..., x^T (n)]; inputs of later steps are carried through
// intermediate layers by identity connections with a weight large enough that
// T_w equals I in double precision. Absent connections have weight 0.
DrnNetwork unroll_rdrn(const RdrnParams& params, int steps);

}  // namespace drn

#endif  // DRN_RECURRENT_HPP
