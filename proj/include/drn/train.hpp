#ifndef DRN_TRAIN_HPP
#define DRN_TRAIN_HPP

#include "drn/data.hpp"
#include "drn/model.hpp"

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <vector>

namespace drn {

struct TrainConfig {
  double learning_rate = 1e-3;
  int max_epochs = 5000;
  int patience = 50;
  std::uint64_t seed = 0;
  InitRanges init;
  int batch_size = 0;  // 0 means full batch

  // Throws InvalidArgument.
  void validate() const;
};

struct Metrics {
  double jsd_mean = 0.0;
  double jsd_se = 0.0;
  double l2_mean = 0.0;
  double l2_se = 0.0;
  std::optional<double> nll_mean;
  std::optional<double> nll_se;
};

struct TrainReport {
  std::vector<double> train_loss;
  std::vector<double> val_loss;
  int best_epoch = -1;
  double best_val_loss = 0.0;
  double final_learning_rate = 0.0;
  Metrics test;
  double seconds = 0.0;
  Eigen::Index param_count = 0;

  // Columns: epoch,train_loss,val_loss
  void write_csv(std::ostream& out) const;
};

// Mean JSD between predictions and targets.
double dataset_loss(const Model& model, const Dataset& data);

// d training-loss / d params at the model's current parameters.
Vector gradient(const Model& model, const Dataset& batch);

Vector finite_diff_gradient(const Model& model, const Dataset& batch, double h);
Vector central_difference(const std::function<double(const Vector&)>& f, const Vector& x, double h);

// Initializes the model from config.seed, then runs Adam (0.9 / 0.999 / 1e-8)
// with validation-based early stopping. The model is left holding the
// parameters of the epoch with the lowest validation loss.
TrainReport train(Model& model, const Dataset& train_data, const Dataset& val_data, const TrainConfig& config);

Metrics evaluate(const Model& model, const Dataset& data);

// Adds NLL of held-out samples; samples[i] belongs to data[i].
void add_nll(Metrics& metrics, const Model& model, const Dataset& data,
             const std::vector<std::vector<double>>& samples);

}  // namespace drn

#endif  // DRN_TRAIN_HPP
