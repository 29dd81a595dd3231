#ifndef DRN_KERNELS_HPP
#define DRN_KERNELS_HPP

#include "drn/distribution.hpp"

#include <Eigen/Dense>

#include <cmath>

namespace drn {

template <typename Scalar>
using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

// Quadratic, absolute and position parameters of a node's bias energy.
struct BiasParams {
  double b_q = 0.0;
  double b_a = 0.0;
  double lambda_q = 0.0;
  double lambda_a = 0.0;

  friend bool operator==(const BiasParams&, const BiasParams&) = default;
};

// ((s_a - s_b) / length)^2 for bins |a - b| = k apart, i.e. (k / q)^2.
template <typename Scalar = double>
VectorX<Scalar> squared_distance_profile(int q) {
  VectorX<Scalar> d2(q);
  for (int k = 0; k < q; ++k) d2(k) = Scalar(k) * Scalar(k) / (Scalar(q) * Scalar(q));
  return d2;
}

// ((s_a - s_b) / length)^2 over bin centers.
template <typename Scalar = double>
MatrixX<Scalar> squared_distance_matrix(const Support& support) {
  const int q = support.bins();
  const VectorX<Scalar> profile = squared_distance_profile<Scalar>(q);
  MatrixX<Scalar> d2(q, q);
  for (int b = 0; b < q; ++b)
    for (int a = 0; a < q; ++a) d2(a, b) = profile(std::abs(a - b));
  return d2;
}

// Connection matrix T_w with entries exp(-w ((s_a - s_b) / length)^2).
template <typename Scalar>
MatrixX<Scalar> transformation_matrix(Scalar w, const MatrixX<Scalar>& squared_distance) {
  return exp_flushed(-w * squared_distance.array()).matrix();
}

// Same matrix from squared_distance_profile, with one exp per distance.
template <typename Scalar>
MatrixX<Scalar> transformation_matrix_from_profile(Scalar w, const VectorX<Scalar>& profile) {
  const VectorX<Scalar> t = exp_flushed(-w * profile.array()).matrix();
  const auto q = profile.size();
  MatrixX<Scalar> out(q, q);
  for (Eigen::Index b = 0; b < q; ++b)
    for (Eigen::Index a = 0; a < q; ++a) out(a, b) = t(a > b ? a - b : b - a);
  return out;
}

template <typename Scalar = double>
MatrixX<Scalar> transformation_matrix(Scalar w, const Support& support) {
  return transformation_matrix<Scalar>(w, squared_distance_matrix<Scalar>(support));
}

// Negative bias energy at each bin center, i.e. log of the bias vector B_0.
template <typename Scalar = double>
VectorX<Scalar> log_bias_vector(const BiasParams& bias, const Support& support) {
  using std::abs;
  const VectorX<Scalar> s = bin_centers<Scalar>(support);
  const Scalar len = static_cast<Scalar>(support.length());
  const auto quad = ((s.array() - Scalar(bias.lambda_q)) / len).square();
  const auto lin = ((s.array() - Scalar(bias.lambda_a)) / len).abs();
  return (-Scalar(bias.b_q) * quad - Scalar(bias.b_a) * lin).matrix();
}

template <typename Scalar = double>
VectorX<Scalar> bias_vector(const BiasParams& bias, const Support& support) {
  return exp_flushed(log_bias_vector<Scalar>(bias, support).array()).matrix();
}

}  // namespace drn

#endif  // DRN_KERNELS_HPP
