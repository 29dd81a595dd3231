#include "drn/model.hpp"

#include "drn/error.hpp"

namespace drn {

namespace {

void check_batch(const PackedBatch& batch, std::size_t expected_inputs, int bins) {
  if (batch.inputs.size() != expected_inputs) {
    throw Error(ErrorCode::ShapeMismatch, "model expects " + std::to_string(expected_inputs) +
                                              " input distributions per sample, got " +
                                              std::to_string(batch.inputs.size()));
  }
  if (batch.targets.rows() != bins) throw Error(ErrorCode::SupportMismatch, "batch bin count differs from model");
}

void fill_node(Vector& params, Eigen::Index& pos, int fan_in, const Support& support, const InitRanges& ranges,
               Rng& rng) {
  std::uniform_real_distribution<double> weight(ranges.weight.first, ranges.weight.second);
  std::uniform_real_distribution<double> magnitude(ranges.bias_magnitude.first, ranges.bias_magnitude.second);
  std::uniform_real_distribution<double> position(support.lower(), support.upper());
  for (int i = 0; i < fan_in; ++i) params(pos++) = weight(rng);
  params(pos++) = magnitude(rng);
  params(pos++) = magnitude(rng);
  params(pos++) = position(rng);
  params(pos++) = position(rng);
}

}  // namespace

void Model::set_params(Vector params) {
  if (params.size() != params_.size()) {
    throw Error(ErrorCode::DimensionMismatch, "expected " + std::to_string(params_.size()) + " parameters, got " +
                                                  std::to_string(params.size()));
  }
  params_ = std::move(params);
}

PackedBatch Model::prepare(const Dataset& data) const {
  if (!(data.support() == support())) throw Error(ErrorCode::SupportMismatch, "dataset support differs from model");
  if (data.nodes_per_step() != nodes_per_step()) {
    throw Error(ErrorCode::ShapeMismatch, "dataset has " + std::to_string(data.nodes_per_step()) +
                                              " distributions per step, model expects " +
                                              std::to_string(nodes_per_step()));
  }
  return pack(data.steps() == history() ? data : truncate_history(data, history()));
}

Vector init_drn_params(const NetworkSpec& spec, const Support& support, const InitRanges& ranges, Rng& rng) {
  Vector params(count_params(spec));
  Eigen::Index pos = 0;
  for (int l = 1; l < spec.layer_count(); ++l)
    for (int k = 0; k < spec.width(l); ++k) fill_node(params, pos, spec.width(l - 1), support, ranges, rng);
  return params;
}

Vector init_rdrn_params(int n, int m, const Support& support, const InitRanges& ranges, Rng& rng) {
  RdrnParams p(n, m, support);
  std::uniform_real_distribution<double> weight(ranges.weight.first, ranges.weight.second);
  std::uniform_real_distribution<double> magnitude(ranges.bias_magnitude.first, ranges.bias_magnitude.second);
  std::uniform_real_distribution<double> position(support.lower(), support.upper());
  auto bias = [&] { return BiasParams{magnitude(rng), magnitude(rng), position(rng), position(rng)}; };
  for (int k = 0; k < m; ++k)
    for (int i = 0; i < n; ++i) p.U(k, i) = weight(rng);
  for (int k = 0; k < m; ++k)
    for (int j = 0; j < m; ++j) p.W(k, j) = weight(rng);
  for (auto& b : p.hidden_bias) b = bias();
  for (int j = 0; j < m; ++j) p.V(j) = weight(rng);
  p.output_bias = bias();
  return p.flatten();
}

DrnModel::DrnModel(NetworkSpec spec, Support support, int nodes_per_step)
    : spec_(std::move(spec)), nodes_(nodes_per_step), evaluator_(make_drn_graph(spec_), support) {
  if (nodes_ < 1 || spec_.input_count() % nodes_ != 0) {
    throw Error(ErrorCode::ShapeMismatch, "input layer width must be a multiple of distributions per step");
  }
  if (spec_.output_count() != 1) throw Error(ErrorCode::ShapeMismatch, "trainable DRN needs one output node");
  params_ = Vector::Zero(count_params(spec_));
}

void DrnModel::initialize(const InitRanges& ranges, Rng& rng) { params_ = init_drn_params(spec_, support(), ranges, rng); }

double DrnModel::loss(const Vector& params, const PackedBatch& batch) const {
  check_batch(batch, spec_.input_count(), support().bins());
  return evaluator_.jsd_loss(params, batch.inputs, batch.targets);
}

double DrnModel::loss_and_gradient(const Vector& params, const PackedBatch& batch, Vector& gradient) const {
  check_batch(batch, spec_.input_count(), support().bins());
  return evaluator_.jsd_loss_and_gradient(params, batch.inputs, batch.targets, gradient);
}

Matrix DrnModel::predict(const Vector& params, const PackedBatch& batch) const {
  check_batch(batch, spec_.input_count(), support().bins());
  return evaluator_.evaluate(params, batch.inputs).front();
}

RdrnModel::RdrnModel(int inputs, int hidden, int steps, Support support)
    : inputs_(inputs),
      hidden_(hidden),
      steps_(steps),
      evaluator_(make_rdrn_graph(inputs, hidden, steps), support),
      initial_hidden_(hidden, Vector::Constant(support.bins(), 1.0 / support.bins())) {
  params_ = Vector::Zero(rdrn_count_params(inputs, hidden));
}

void RdrnModel::initialize(const InitRanges& ranges, Rng& rng) {
  params_ = init_rdrn_params(inputs_, hidden_, support(), ranges, rng);
}

void RdrnModel::set_initial_hidden(std::vector<BinnedDistribution> hidden) {
  if (static_cast<int>(hidden.size()) != hidden_) throw Error(ErrorCode::DimensionMismatch, "wrong hidden count");
  initial_hidden_.clear();
  for (const auto& h : hidden) {
    if (!(h.support() == support())) throw Error(ErrorCode::SupportMismatch, "initial hidden support differs");
    initial_hidden_.push_back(h.mass());
  }
}

std::vector<Matrix> RdrnModel::with_initial_hidden(const PackedBatch& batch) const {
  check_batch(batch, static_cast<std::size_t>(inputs_) * steps_, support().bins());
  std::vector<Matrix> inputs = batch.inputs;
  for (const auto& h : initial_hidden_) inputs.push_back(h.replicate(1, batch.size()));
  return inputs;
}

double RdrnModel::loss(const Vector& params, const PackedBatch& batch) const {
  return evaluator_.jsd_loss(params, with_initial_hidden(batch), batch.targets);
}

double RdrnModel::loss_and_gradient(const Vector& params, const PackedBatch& batch, Vector& gradient) const {
  return evaluator_.jsd_loss_and_gradient(params, with_initial_hidden(batch), batch.targets, gradient);
}

Matrix RdrnModel::predict(const Vector& params, const PackedBatch& batch) const {
  return evaluator_.evaluate(params, with_initial_hidden(batch)).front();
}

}  // namespace drn
