#ifndef DRN_MLP_HPP
#define DRN_MLP_HPP

// Multilayer perceptron baseline over concatenated binned inputs. Hidden and
// output layers use the logistic sigmoid; the output is normalized only for
// evaluation, while training minimizes squared error on the raw output.

#include "drn/model.hpp"

#include <vector>

namespace drn {

struct MlpParams {
  explicit MlpParams(std::vector<int> dims);

  std::vector<int> dims;        // [d_in, h_1, ..., h_H, d_out]
  std::vector<Matrix> weights;  // weights[l] is dims[l+1] x dims[l]
  std::vector<Vector> biases;

  // Per layer: weight matrix in column-major order, then bias.
  Vector flatten() const;
  static MlpParams unflatten(const std::vector<int>& dims, const Vector& params);
};

int mlp_count_params(const std::vector<int>& dims);

BinnedDistribution mlp_forward(const MlpParams& params, const Sequence& inputs);

class MlpModel final : public Model {
 public:
  MlpModel(std::vector<int> dims, Support support, int nodes_per_step = 1);

  std::string kind() const override { return "mlp"; }
  const Support& support() const override { return support_; }
  int history() const override { return dims_.front() / (nodes_ * support_.bins()); }
  int nodes_per_step() const override { return nodes_; }
  std::vector<std::string> param_labels() const override;
  std::unique_ptr<Model> clone() const override { return std::make_unique<MlpModel>(*this); }

  // Weights ~ U(-r, r) with r = sqrt(6 / (fan_in + fan_out)); biases zero.
  void initialize(const InitRanges& ranges, Rng& rng) override;

  // Squared error of the sigmoid output summed over bins, averaged over samples.
  double loss(const Vector& params, const PackedBatch& batch) const override;
  double loss_and_gradient(const Vector& params, const PackedBatch& batch, Vector& gradient) const override;
  Matrix predict(const Vector& params, const PackedBatch& batch) const override;
  using Model::loss;
  using Model::predict;

  const std::vector<int>& dims() const noexcept { return dims_; }

 private:
  Matrix stack(const PackedBatch& batch) const;
  std::vector<Matrix> activations(const Vector& params, const Matrix& x) const;

  std::vector<int> dims_;
  Support support_;
  int nodes_;
};

}  // namespace drn

#endif  // DRN_MLP_HPP
