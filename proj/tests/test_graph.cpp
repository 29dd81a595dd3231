#include "drn/graph.hpp"
#include "drn/recurrent.hpp"

#include "helpers.hpp"

#include <cmath>

using namespace drn;
using drn::test::error_code_of;
using drn::test::random_distributions;

namespace {

Matrix random_batch(const Support& s, int cols, Rng& rng) {
  Matrix m(s.bins(), cols);
  for (int c = 0; c < cols; ++c) m.col(c) = test::random_distribution(s, rng).mass();
  return m;
}

Vector random_params(Eigen::Index n, Rng& rng) {
  std::uniform_real_distribution<double> u(0.0, 3.0);
  Vector p(n);
  for (auto& v : p) v = u(rng);
  return p;
}

}  // namespace

TEST_CASE("graph validation") {
  CHECK(error_code_of([] { PropagationGraph(1, {GraphNode{{{1, 0}}, 1}}, {0}); }) == ErrorCode::InvalidArgument);
  CHECK(error_code_of([] { PropagationGraph(1, {GraphNode{{}, 0}}, {0}); }) == ErrorCode::InvalidArgument);
  CHECK(error_code_of([] { PropagationGraph(1, {GraphNode{{{0, 0}}, 1}}, {3}); }) == ErrorCode::InvalidArgument);
}

TEST_CASE("batched evaluation matches the per-node forward pass") {
  const Support s(0, 1, 30);
  Rng rng(1);
  const NetworkSpec spec({3, 4, 2});
  const Vector params = random_params(count_params(spec), rng);
  const DrnNetwork net = DrnNetwork::unflatten(spec, s, params);
  GraphEvaluator evaluator(make_drn_graph(spec), s);

  std::vector<Matrix> inputs;
  for (int i = 0; i < 3; ++i) inputs.push_back(random_batch(s, 5, rng));
  const auto out = evaluator.evaluate(params, inputs);
  REQUIRE(out.size() == 2);
  for (int c = 0; c < 5; ++c) {
    std::vector<BinnedDistribution> in;
    for (const auto& m : inputs) in.push_back(BinnedDistribution(s, m.col(c)));
    const auto ref = forward(net, in).outputs;
    for (int o = 0; o < 2; ++o) CHECK((out[o].col(c) - ref[o].mass()).cwiseAbs().maxCoeff() < 1e-14);
  }
  CHECK(error_code_of([&] { evaluator.jsd_loss(params, inputs, inputs[0]); }) == ErrorCode::DimensionMismatch);
  inputs.pop_back();
  CHECK(error_code_of([&] { evaluator.evaluate(params, inputs); }) == ErrorCode::DimensionMismatch);
}

TEST_CASE("tied weights accumulate gradient") {
  const Support s(0, 1, 12);
  Rng rng(2);
  const PropagationGraph graph = make_rdrn_graph(1, 2, 3);
  GraphEvaluator evaluator(graph, s);
  const Vector params = random_params(rdrn_count_params(1, 2), rng);
  std::vector<Matrix> inputs;
  for (int i = 0; i < 3; ++i) inputs.push_back(random_batch(s, 4, rng));
  for (int i = 0; i < 2; ++i) inputs.push_back(Matrix::Constant(s.bins(), 4, 1.0 / s.bins()));
  const Matrix targets = random_batch(s, 4, rng);

  Vector grad;
  const double loss = evaluator.jsd_loss_and_gradient(params, inputs, targets, grad);
  CHECK(loss == doctest::Approx(evaluator.jsd_loss(params, inputs, targets)).epsilon(1e-14));
  const Vector numeric = [&] {
    Vector g(params.size()), p = params;
    for (Eigen::Index i = 0; i < p.size(); ++i) {
      p(i) += 1e-6;
      const double up = evaluator.jsd_loss(p, inputs, targets);
      p(i) -= 2e-6;
      const double down = evaluator.jsd_loss(p, inputs, targets);
      p(i) = params(i);
      g(i) = (up - down) / 2e-6;
    }
    return g;
  }();
  CHECK(((grad - numeric).array().abs() / numeric.array().abs().max(1.0)).maxCoeff() < 1e-6);
}

TEST_CASE("jsd columns and gradient") {
  Matrix p(2, 2), t(2, 2);
  p << 0.5, 1.0, 0.5, 0.0;
  t << 1.0, 0.0, 0.0, 1.0;
  const auto v = jsd_columns(p, t);
  CHECK(std::abs(v(0) - 0.21576155433883565) < 1e-15);
  CHECK(v(1) == doctest::Approx(std::log(2.0)));
  const Matrix g = jsd_gradient(p, t);
  CHECK(g(1, 1) == 0.0);
  CHECK(g(0, 0) == doctest::Approx(0.5 * std::log(2 * 0.5 / 1.5)));
}

TEST_CASE("underflowing factors keep a correct gradient") {
  // Large weight on an input that is zero over most bins drives many factors to zero.
  const Support s(0, 1, 20);
  Rng rng(3);
  const NetworkSpec spec({2, 1});
  Vector params(6);
  params << 2e4, 1.0, 0.5, 0.3, 0.4, 0.6;
  GraphEvaluator evaluator(make_drn_graph(spec), s);
  Matrix sparse = Matrix::Zero(20, 1);
  sparse(4, 0) = 0.5;
  sparse(5, 0) = 0.5;
  const std::vector<Matrix> inputs{sparse, random_batch(s, 1, rng)};
  const Matrix target = random_batch(s, 1, rng);
  Vector grad;
  evaluator.jsd_loss_and_gradient(params, inputs, target, grad);
  CHECK(grad.allFinite());
  Vector p = params;
  const double h = 1e-6;
  for (Eigen::Index i = 1; i < p.size(); ++i) {
    p(i) += h;
    const double up = evaluator.jsd_loss(p, inputs, target);
    p(i) -= 2 * h;
    const double down = evaluator.jsd_loss(p, inputs, target);
    p(i) = params(i);
    CHECK(std::abs(grad(i) - (up - down) / (2 * h)) < 1e-6);
  }
}
