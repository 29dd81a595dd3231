#ifndef DRN_MODEL_HPP
#define DRN_MODEL_HPP

#include "drn/data.hpp"
#include "drn/graph.hpp"
#include "drn/network.hpp"
#include "drn/recurrent.hpp"

#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace drn {

struct InitRanges {
  std::pair<double, double> weight{0.0, 1.0};
  std::pair<double, double> bias_magnitude{0.0, 1.0};
};

// A trainable predictor over a flat parameter vector. loss() is the training
// objective; predict() returns normalized distributions, one column per sample.
class Model {
 public:
  virtual ~Model() = default;

  virtual std::string kind() const = 0;
  virtual const Support& support() const = 0;
  virtual int history() const = 0;
  virtual int nodes_per_step() const = 0;
  virtual std::vector<std::string> param_labels() const = 0;
  virtual std::unique_ptr<Model> clone() const = 0;

  virtual void initialize(const InitRanges& ranges, Rng& rng) = 0;

  virtual double loss(const Vector& params, const PackedBatch& batch) const = 0;
  virtual double loss_and_gradient(const Vector& params, const PackedBatch& batch, Vector& gradient) const = 0;
  virtual Matrix predict(const Vector& params, const PackedBatch& batch) const = 0;

  const Vector& params() const noexcept { return params_; }
  void set_params(Vector params);
  Eigen::Index param_count() const noexcept { return params_.size(); }

  double loss(const PackedBatch& batch) const { return loss(params_, batch); }
  Matrix predict(const PackedBatch& batch) const { return predict(params_, batch); }

  // Truncates the dataset to this model's history and packs it.
  PackedBatch prepare(const Dataset& data) const;

 protected:
  Vector params_;
};

class DrnModel final : public Model {
 public:
  DrnModel(NetworkSpec spec, Support support, int nodes_per_step = 1);

  std::string kind() const override { return "drn"; }
  const Support& support() const override { return evaluator_.support(); }
  int history() const override { return spec_.input_count() / nodes_; }
  int nodes_per_step() const override { return nodes_; }
  std::vector<std::string> param_labels() const override { return DrnNetwork::param_labels(spec_); }
  std::unique_ptr<Model> clone() const override { return std::make_unique<DrnModel>(*this); }
  void initialize(const InitRanges& ranges, Rng& rng) override;

  double loss(const Vector& params, const PackedBatch& batch) const override;
  double loss_and_gradient(const Vector& params, const PackedBatch& batch, Vector& gradient) const override;
  Matrix predict(const Vector& params, const PackedBatch& batch) const override;
  using Model::loss;
  using Model::predict;

  const NetworkSpec& spec() const noexcept { return spec_; }
  DrnNetwork network() const { return DrnNetwork::unflatten(spec_, support(), params_); }

 private:
  NetworkSpec spec_;
  int nodes_;
  GraphEvaluator evaluator_;
};

class RdrnModel final : public Model {
 public:
  RdrnModel(int inputs, int hidden, int steps, Support support);

  std::string kind() const override { return "rdrn"; }
  const Support& support() const override { return evaluator_.support(); }
  int history() const override { return steps_; }
  int nodes_per_step() const override { return inputs_; }
  std::vector<std::string> param_labels() const override { return RdrnParams::param_labels(inputs_, hidden_); }
  std::unique_ptr<Model> clone() const override { return std::make_unique<RdrnModel>(*this); }
  void initialize(const InitRanges& ranges, Rng& rng) override;

  double loss(const Vector& params, const PackedBatch& batch) const override;
  double loss_and_gradient(const Vector& params, const PackedBatch& batch, Vector& gradient) const override;
  Matrix predict(const Vector& params, const PackedBatch& batch) const override;
  using Model::loss;
  using Model::predict;

  int hidden() const noexcept { return hidden_; }
  RdrnParams rdrn_params() const { return RdrnParams::unflatten(inputs_, hidden_, support(), params_); }
  void set_initial_hidden(std::vector<BinnedDistribution> hidden);

 private:
  std::vector<Matrix> with_initial_hidden(const PackedBatch& batch) const;

  int inputs_;
  int hidden_;
  int steps_;
  GraphEvaluator evaluator_;
  std::vector<Vector> initial_hidden_;
};

Vector init_drn_params(const NetworkSpec& spec, const Support& support, const InitRanges& ranges, Rng& rng);
Vector init_rdrn_params(int inputs, int hidden, const Support& support, const InitRanges& ranges, Rng& rng);

}  // namespace drn

#endif  // DRN_MODEL_HPP
