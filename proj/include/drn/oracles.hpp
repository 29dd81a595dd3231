#ifndef DRN_ORACLES_HPP
#define DRN_ORACLES_HPP

// Slow reference evaluations of node propagation used to cross-check the
// separable matrix/Hadamard implementation.

#include "drn/network.hpp"

#include <span>
#include <vector>

namespace drn {

inline constexpr int kBruteForceMaxFanIn = 4;
inline constexpr int kBruteForceMaxBins = 16;
inline constexpr int kCrossTermMaxFanIn = 3;
inline constexpr int kCrossTermMaxBins = 8;

// Direct summation of exp(-E) * prod p_i over all q^n incoming bin combinations.
Vector brute_force_node(const NodeParams& node, std::span<const BinnedDistribution> incoming);

// Coefficient tensor times cross-term tensor, summed term by term.
Vector cross_term_expansion(const NodeParams& node, std::span<const BinnedDistribution> incoming);

// Normalized output with every T_w replaced by its first-order expansion in w.
BinnedDistribution linearized_node_output(const NodeParams& node, std::span<const BinnedDistribution> incoming);

// Forward pass that never normalizes hidden activations. Scale is carried as a
// separate log factor so the unnormalized values cannot overflow; only the
// output layer is normalized.
std::vector<BinnedDistribution> forward_unnormalized_hidden(const DrnNetwork& net,
                                                            std::span<const BinnedDistribution> inputs);

}  // namespace drn

#endif  // DRN_ORACLES_HPP
