#include "drn/mlp.hpp"

#include "drn/error.hpp"

#include <cmath>

namespace drn {

namespace {

void check_dims(const std::vector<int>& dims) {
  if (dims.size() < 2) throw Error(ErrorCode::InvalidArgument, "MLP needs at least input and output widths");
  for (int d : dims)
    if (d < 1) throw Error(ErrorCode::InvalidArgument, "MLP widths must be positive");
}

Matrix sigmoid(const Matrix& z) { return (1.0 / (1.0 + (-z.array()).exp())).matrix(); }

}  // namespace

int mlp_count_params(const std::vector<int>& dims) {
  check_dims(dims);
  int total = 0;
  for (std::size_t l = 0; l + 1 < dims.size(); ++l) total += dims[l] * dims[l + 1] + dims[l + 1];
  return total;
}

MlpParams::MlpParams(std::vector<int> d) : dims(std::move(d)) {
  check_dims(dims);
  for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
    weights.push_back(Matrix::Zero(dims[l + 1], dims[l]));
    biases.push_back(Vector::Zero(dims[l + 1]));
  }
}

Vector MlpParams::flatten() const {
  Vector out(mlp_count_params(dims));
  Eigen::Index pos = 0;
  for (std::size_t l = 0; l < weights.size(); ++l) {
    out.segment(pos, weights[l].size()) = weights[l].reshaped();
    pos += weights[l].size();
    out.segment(pos, biases[l].size()) = biases[l];
    pos += biases[l].size();
  }
  return out;
}

MlpParams MlpParams::unflatten(const std::vector<int>& dims, const Vector& params) {
  MlpParams out(dims);
  if (params.size() != mlp_count_params(dims)) throw Error(ErrorCode::DimensionMismatch, "MLP parameter length");
  Eigen::Index pos = 0;
  for (std::size_t l = 0; l < out.weights.size(); ++l) {
    out.weights[l] = params.segment(pos, out.weights[l].size()).reshaped(out.weights[l].rows(), out.weights[l].cols());
    pos += out.weights[l].size();
    out.biases[l] = params.segment(pos, out.biases[l].size());
    pos += out.biases[l].size();
  }
  return out;
}

BinnedDistribution mlp_forward(const MlpParams& params, const Sequence& inputs) {
  if (inputs.empty() || inputs.front().empty()) throw Error(ErrorCode::ShapeMismatch, "MLP needs input distributions");
  const Support& support = inputs.front().front().support();
  Vector x(params.dims.front());
  Eigen::Index pos = 0;
  for (const auto& step : inputs) {
    for (const auto& p : step) {
      if (pos + p.bins() > x.size()) throw Error(ErrorCode::ShapeMismatch, "inputs exceed MLP input width");
      x.segment(pos, p.bins()) = p.mass();
      pos += p.bins();
    }
  }
  if (pos != x.size()) throw Error(ErrorCode::ShapeMismatch, "inputs do not fill MLP input width");
  if (params.dims.back() != support.bins()) throw Error(ErrorCode::ShapeMismatch, "MLP output width differs from q");
  for (std::size_t l = 0; l < params.weights.size(); ++l) x = sigmoid(params.weights[l] * x + params.biases[l]);
  return normalize(x, support);
}

MlpModel::MlpModel(std::vector<int> dims, Support support, int nodes_per_step)
    : dims_(std::move(dims)), support_(support), nodes_(nodes_per_step) {
  check_dims(dims_);
  if (dims_.back() != support_.bins()) throw Error(ErrorCode::ShapeMismatch, "MLP output width must equal q");
  if (nodes_ < 1 || dims_.front() % (nodes_ * support_.bins()) != 0) {
    throw Error(ErrorCode::ShapeMismatch, "MLP input width must be a multiple of q times distributions per step");
  }
  params_ = Vector::Zero(mlp_count_params(dims_));
}

std::vector<std::string> MlpModel::param_labels() const {
  std::vector<std::string> labels;
  for (std::size_t l = 0; l + 1 < dims_.size(); ++l) {
    const std::string prefix = "layer" + std::to_string(l + 1) + ".";
    for (int c = 0; c < dims_[l]; ++c)
      for (int r = 0; r < dims_[l + 1]; ++r)
        labels.push_back(prefix + "W[" + std::to_string(r) + "," + std::to_string(c) + "]");
    for (int r = 0; r < dims_[l + 1]; ++r) labels.push_back(prefix + "b[" + std::to_string(r) + "]");
  }
  return labels;
}

void MlpModel::initialize(const InitRanges&, Rng& rng) {
  Eigen::Index pos = 0;
  for (std::size_t l = 0; l + 1 < dims_.size(); ++l) {
    const double r = std::sqrt(6.0 / (dims_[l] + dims_[l + 1]));
    std::uniform_real_distribution<double> u(-r, r);
    const Eigen::Index n = static_cast<Eigen::Index>(dims_[l]) * dims_[l + 1];
    for (Eigen::Index i = 0; i < n; ++i) params_(pos++) = u(rng);
    for (int i = 0; i < dims_[l + 1]; ++i) params_(pos++) = 0.0;
  }
}

Matrix MlpModel::stack(const PackedBatch& batch) const {
  const int q = support_.bins();
  if (static_cast<int>(batch.inputs.size()) * q != dims_.front()) {
    throw Error(ErrorCode::ShapeMismatch, "batch width " + std::to_string(batch.inputs.size() * q) +
                                              " differs from MLP input width " + std::to_string(dims_.front()));
  }
  Matrix x(dims_.front(), batch.size());
  for (std::size_t i = 0; i < batch.inputs.size(); ++i) x.middleRows(i * q, q) = batch.inputs[i];
  return x;
}

std::vector<Matrix> MlpModel::activations(const Vector& params, const Matrix& x) const {
  if (params.size() != params_.size()) throw Error(ErrorCode::DimensionMismatch, "MLP parameter length");
  std::vector<Matrix> acts{x};
  Eigen::Index pos = 0;
  for (std::size_t l = 0; l + 1 < dims_.size(); ++l) {
    const Eigen::Map<const Matrix> w(params.data() + pos, dims_[l + 1], dims_[l]);
    pos += w.size();
    const Eigen::Map<const Vector> b(params.data() + pos, dims_[l + 1]);
    pos += b.size();
    Matrix z = w * acts.back();
    z.colwise() += b;
    acts.push_back(sigmoid(z));
  }
  return acts;
}

double MlpModel::loss(const Vector& params, const PackedBatch& batch) const {
  const auto acts = activations(params, stack(batch));
  return (acts.back() - batch.targets).squaredNorm() / static_cast<double>(batch.targets.cols());
}

double MlpModel::loss_and_gradient(const Vector& params, const PackedBatch& batch, Vector& gradient) const {
  const auto acts = activations(params, stack(batch));
  const Matrix diff = acts.back() - batch.targets;
  const double scale = 1.0 / static_cast<double>(batch.targets.cols());

  gradient = Vector::Zero(params.size());
  Matrix delta = (2.0 * scale * diff.array() * acts.back().array() * (1.0 - acts.back().array())).matrix();
  Eigen::Index end = params.size();
  for (std::size_t l = dims_.size() - 1; l-- > 0;) {
    const Eigen::Index bias_pos = end - dims_[l + 1];
    const Eigen::Index weight_pos = bias_pos - static_cast<Eigen::Index>(dims_[l]) * dims_[l + 1];
    gradient.segment(bias_pos, dims_[l + 1]) = delta.rowwise().sum();
    Eigen::Map<Matrix>(gradient.data() + weight_pos, dims_[l + 1], dims_[l]).noalias() = delta * acts[l].transpose();
    if (l > 0) {
      const Eigen::Map<const Matrix> w(params.data() + weight_pos, dims_[l + 1], dims_[l]);
      Matrix back = w.transpose() * delta;
      delta = (back.array() * acts[l].array() * (1.0 - acts[l].array())).matrix();
    }
    end = weight_pos;
  }
  return diff.squaredNorm() * scale;
}

Matrix MlpModel::predict(const Vector& params, const PackedBatch& batch) const {
  Matrix out = activations(params, stack(batch)).back();
  out.array().rowwise() /= out.colwise().sum().array();
  return out;
}

}  // namespace drn
