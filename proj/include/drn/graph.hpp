#ifndef DRN_GRAPH_HPP
#define DRN_GRAPH_HPP

// Batched evaluation of an acyclic graph of distribution nodes whose weights
// and biases are read from a flat parameter vector. Weight slots may be shared
// between edges (tied weights); gradients accumulate into the shared slot.
//
// Values are numbered [inputs..., nodes...]. Each sample is one column of a
// q x N matrix. Activations are combined in log space and normalized with a
// column-wise log-sum-exp, so products of many small factors do not underflow.

#include "drn/distribution.hpp"
#include "drn/network.hpp"

#include <span>
#include <unordered_map>
#include <vector>

namespace drn {

struct GraphEdge {
  int source;
  Eigen::Index weight_index;
};

struct GraphNode {
  std::vector<GraphEdge> edges;
  Eigen::Index bias_index;  // b_q, b_a, lambda_q, lambda_a are consecutive
};

class PropagationGraph {
 public:
  PropagationGraph(int input_count, std::vector<GraphNode> nodes, std::vector<int> outputs);

  int input_count() const noexcept { return inputs_; }
  const std::vector<GraphNode>& nodes() const noexcept { return nodes_; }
  const std::vector<int>& outputs() const noexcept { return outputs_; }

 private:
  int inputs_;
  std::vector<GraphNode> nodes_;
  std::vector<int> outputs_;  // node indices (not value indices)
};

PropagationGraph make_drn_graph(const NetworkSpec& spec);

class GraphEvaluator {
 public:
  GraphEvaluator(PropagationGraph graph, Support support);

  const PropagationGraph& graph() const noexcept { return graph_; }
  const Support& support() const noexcept { return support_; }

  // Normalized output activations, one q x N matrix per output node.
  std::vector<Matrix> evaluate(const Vector& params, std::span<const Matrix> inputs) const;

  // Mean Jensen-Shannon divergence between the single output and the target columns.
  double jsd_loss(const Vector& params, std::span<const Matrix> inputs, const Matrix& targets) const;

  // Same loss; writes d loss / d params into gradient (resized to params.size()).
  double jsd_loss_and_gradient(const Vector& params, std::span<const Matrix> inputs, const Matrix& targets,
                               Vector& gradient) const;

 private:
  struct NodeCache {
    std::vector<Matrix> factors;      // T_w * source per edge
    std::vector<Matrix> log_factors;  // log of the above, -inf where zero
    Matrix output;                    // normalized activation
    Eigen::RowVectorXd log_total;     // log of the unnormalized column sums
  };

  using KernelCache = std::unordered_map<Eigen::Index, Matrix>;

  void run(const Vector& params, std::span<const Matrix> inputs, std::vector<NodeCache>& cache,
           KernelCache& kernels, bool keep_factors) const;
  const Matrix& value(int index, std::span<const Matrix> inputs, const std::vector<NodeCache>& cache) const;

  PropagationGraph graph_;
  Support support_;
  Vector distance_profile_;
  Matrix squared_distance_;
  Vector centers_;
};

// Column-wise JSD values and d JSD / d prediction. Bins with zero predicted
// mass get a zero gradient: it is only ever multiplied by that mass.
Eigen::RowVectorXd jsd_columns(const Matrix& predicted, const Matrix& target);
Matrix jsd_gradient(const Matrix& predicted, const Matrix& target);

}  // namespace drn

#endif  // DRN_GRAPH_HPP
