#include "drn/train.hpp"

#include "drn/error.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <ostream>

namespace drn {

namespace {

std::pair<double, double> mean_and_se(const std::vector<double>& v) {
  const double n = static_cast<double>(v.size());
  const double mean = std::accumulate(v.begin(), v.end(), 0.0) / n;
  if (v.size() < 2) return {mean, 0.0};
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  return {mean, std::sqrt(ss / (n - 1.0) / n)};
}

PackedBatch select_columns(const PackedBatch& full, const std::vector<Eigen::Index>& cols) {
  PackedBatch out;
  for (const auto& m : full.inputs) {
    Matrix sub(m.rows(), static_cast<Eigen::Index>(cols.size()));
    for (std::size_t c = 0; c < cols.size(); ++c) sub.col(c) = m.col(cols[c]);
    out.inputs.push_back(std::move(sub));
  }
  out.targets.resize(full.targets.rows(), static_cast<Eigen::Index>(cols.size()));
  for (std::size_t c = 0; c < cols.size(); ++c) out.targets.col(c) = full.targets.col(cols[c]);
  return out;
}

}  // namespace

void TrainConfig::validate() const {
  if (!(learning_rate > 0.0)) throw Error(ErrorCode::InvalidArgument, "learning rate must be positive");
  if (max_epochs < 0) throw Error(ErrorCode::InvalidArgument, "max_epochs must be non-negative");
  if (patience < 1) throw Error(ErrorCode::InvalidArgument, "patience must be at least 1");
  if (!(init.weight.first < init.weight.second) || !(init.bias_magnitude.first < init.bias_magnitude.second)) {
    throw Error(ErrorCode::InvalidArgument, "initialization ranges need lo < hi");
  }
  if (batch_size < 0) throw Error(ErrorCode::InvalidArgument, "batch size must be non-negative");
}

void TrainReport::write_csv(std::ostream& out) const {
  out << "epoch,train_loss,val_loss\n";
  const auto old = out.precision(17);
  for (std::size_t e = 0; e < train_loss.size(); ++e) out << e << ',' << train_loss[e] << ',' << val_loss[e] << '\n';
  out.precision(old);
}

double dataset_loss(const Model& model, const Dataset& data) {
  if (data.empty()) throw Error(ErrorCode::EmptySamples, "loss over an empty dataset");
  const PackedBatch batch = model.prepare(data);
  return jsd_columns(model.predict(batch), batch.targets).mean();
}

Vector gradient(const Model& model, const Dataset& batch) {
  if (batch.empty()) throw Error(ErrorCode::EmptySamples, "gradient over an empty batch");
  Vector g;
  model.loss_and_gradient(model.params(), model.prepare(batch), g);
  if (!g.allFinite()) throw Error(ErrorCode::NonFiniteGradient, "gradient has non-finite components");
  return g;
}

Vector central_difference(const std::function<double(const Vector&)>& f, const Vector& x, double h) {
  if (!(h > 0.0)) throw Error(ErrorCode::InvalidArgument, "finite-difference step must be positive");
  Vector g(x.size());
  Vector probe = x;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    probe(i) = x(i) + h;
    const double up = f(probe);
    probe(i) = x(i) - h;
    const double down = f(probe);
    probe(i) = x(i);
    g(i) = (up - down) / (2.0 * h);
  }
  return g;
}

Vector finite_diff_gradient(const Model& model, const Dataset& batch, double h) {
  const PackedBatch packed = model.prepare(batch);
  return central_difference([&](const Vector& p) { return model.loss(p, packed); }, model.params(), h);
}

TrainReport train(Model& model, const Dataset& train_data, const Dataset& val_data, const TrainConfig& config) {
  config.validate();
  if (train_data.empty() || val_data.empty()) throw Error(ErrorCode::EmptySamples, "training needs train and val data");
  if (!(train_data.support() == val_data.support())) {
    throw Error(ErrorCode::SupportMismatch, "train and validation supports differ");
  }
  const auto start = std::chrono::steady_clock::now();

  Rng init_rng(config.seed);
  model.initialize(config.init, init_rng);
  Rng batch_rng(config.seed ^ 0x9e3779b97f4a7c15ULL);

  const PackedBatch train_batch = model.prepare(train_data);
  const PackedBatch val_batch = model.prepare(val_data);
  const auto n_train = static_cast<Eigen::Index>(train_data.size());
  const bool full_batch = config.batch_size == 0 || config.batch_size >= n_train;

  TrainReport report;
  report.param_count = model.param_count();
  double lr = config.learning_rate;
  bool retried = false;

  Vector theta = model.params();
  Vector best = theta;
  Vector m1 = Vector::Zero(theta.size());
  Vector m2 = Vector::Zero(theta.size());
  Vector grad;
  constexpr double beta1 = 0.9, beta2 = 0.999, eps = 1e-8;
  long long step = 0;
  int since_best = 0;
  std::vector<Eigen::Index> order(n_train);
  std::iota(order.begin(), order.end(), Eigen::Index{0});

  // Returns false when a non-finite value was met.
  auto epoch_step = [&](double& train_loss) -> bool {
    try {
      if (full_batch) {
        train_loss = model.loss_and_gradient(theta, train_batch, grad);
        if (!std::isfinite(train_loss) || !grad.allFinite()) return false;
        ++step;
        m1 = beta1 * m1 + (1.0 - beta1) * grad;
        m2 = beta2 * m2 + (1.0 - beta2) * grad.cwiseAbs2();
        const double c1 = 1.0 - std::pow(beta1, static_cast<double>(step));
        const double c2 = 1.0 - std::pow(beta2, static_cast<double>(step));
        theta.array() -= lr * (m1.array() / c1) / ((m2.array() / c2).sqrt() + eps);
        return theta.allFinite();
      }
      std::shuffle(order.begin(), order.end(), batch_rng);
      double weighted = 0.0;
      for (Eigen::Index begin = 0; begin < n_train; begin += config.batch_size) {
        const Eigen::Index end = std::min<Eigen::Index>(begin + config.batch_size, n_train);
        const PackedBatch mb =
            select_columns(train_batch, std::vector<Eigen::Index>(order.begin() + begin, order.begin() + end));
        const double l = model.loss_and_gradient(theta, mb, grad);
        if (!std::isfinite(l) || !grad.allFinite()) return false;
        weighted += l * static_cast<double>(end - begin);
        ++step;
        m1 = beta1 * m1 + (1.0 - beta1) * grad;
        m2 = beta2 * m2 + (1.0 - beta2) * grad.cwiseAbs2();
        const double c1 = 1.0 - std::pow(beta1, static_cast<double>(step));
        const double c2 = 1.0 - std::pow(beta2, static_cast<double>(step));
        theta.array() -= lr * (m1.array() / c1) / ((m2.array() / c2).sqrt() + eps);
      }
      train_loss = weighted / static_cast<double>(n_train);
      return theta.allFinite();
    } catch (const Error& e) {
      if (e.code() == ErrorCode::NormalizationUnderflow) return false;
      throw;
    }
  };

  for (int epoch = 0; epoch < config.max_epochs; ++epoch) {
    double val_loss = 0.0;
    bool finite = true;
    try {
      val_loss = model.loss(theta, val_batch);
      finite = std::isfinite(val_loss);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::NormalizationUnderflow) throw;
      finite = false;
    }
    const Vector before = theta;
    double train_loss = 0.0;
    if (finite) finite = epoch_step(train_loss);
    if (!finite) {
      if (retried) {
        throw Error(ErrorCode::NonFiniteGradient, "non-finite loss or gradient at epoch " + std::to_string(epoch) +
                                                      " after reducing the learning rate to " + std::to_string(lr));
      }
      retried = true;
      lr /= 10.0;
      theta = report.best_epoch >= 0 ? best : before;
      m1.setZero();
      m2.setZero();
      step = 0;
      --epoch;
      continue;
    }
    // losses recorded for the parameters at the start of the epoch
    report.train_loss.push_back(train_loss);
    report.val_loss.push_back(val_loss);
    if (report.best_epoch < 0 || val_loss < report.best_val_loss) {
      report.best_epoch = epoch;
      report.best_val_loss = val_loss;
      best = before;
      since_best = 0;
    } else if (++since_best >= config.patience) {
      break;
    }
  }

  model.set_params(report.best_epoch >= 0 ? best : model.params());
  report.final_learning_rate = lr;
  report.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return report;
}

Metrics evaluate(const Model& model, const Dataset& data) {
  if (data.empty()) throw Error(ErrorCode::EmptySamples, "evaluation over an empty dataset");
  const PackedBatch batch = model.prepare(data);
  const Matrix predicted = model.predict(batch);
  const Eigen::RowVectorXd jsd = jsd_columns(predicted, batch.targets);
  const double width = data.support().bin_width();
  std::vector<double> jsds(jsd.begin(), jsd.end());
  std::vector<double> l2s;
  for (Eigen::Index c = 0; c < predicted.cols(); ++c)
    l2s.push_back(((predicted.col(c) - batch.targets.col(c)) / width).norm() * std::sqrt(width));
  Metrics m;
  std::tie(m.jsd_mean, m.jsd_se) = mean_and_se(jsds);
  std::tie(m.l2_mean, m.l2_se) = mean_and_se(l2s);
  return m;
}

void add_nll(Metrics& metrics, const Model& model, const Dataset& data,
             const std::vector<std::vector<double>>& samples) {
  if (samples.size() != data.size()) throw Error(ErrorCode::DimensionMismatch, "one sample list per data item");
  const Matrix predicted = model.predict(model.prepare(data));
  std::vector<double> values;
  for (Eigen::Index c = 0; c < predicted.cols(); ++c) {
    const BinnedDistribution p = normalize(predicted.col(c), data.support());
    values.push_back(nll(p, samples[c]));
  }
  const auto [mean, se] = mean_and_se(values);
  metrics.nll_mean = mean;
  metrics.nll_se = se;
}

}  // namespace drn
