#include "drn/network.hpp"
#include "drn/oracles.hpp"

#include "helpers.hpp"

#include <cmath>

using namespace drn;
using drn::test::error_code_of;
using drn::test::random_distributions;

namespace {

NodeParams random_node(int fan_in, const Support& s, Rng& rng) {
  std::uniform_real_distribution<double> w(0.0, 5.0), b(0.0, 2.0), pos(s.lower(), s.upper());
  NodeParams n;
  n.weights.resize(fan_in);
  for (auto& x : n.weights) x = w(rng);
  n.bias = {b(rng), b(rng), pos(rng), pos(rng)};
  return n;
}

DrnNetwork random_network(const std::vector<int>& sizes, const Support& s, Rng& rng) {
  DrnNetwork net(NetworkSpec(sizes), s);
  for (int l = 1; l < static_cast<int>(sizes.size()); ++l)
    for (int k = 0; k < sizes[l]; ++k) net.node(l, k) = random_node(sizes[l - 1], s, rng);
  return net;
}

}  // namespace

TEST_CASE("transformation matrix") {
  const Support s(0, 1, 100);
  CHECK((transformation_matrix(0.0, s).array() == 1.0).all());
  const Matrix big = transformation_matrix(1e6, s);
  CHECK((big - Matrix::Identity(100, 100)).cwiseAbs().maxCoeff() < 1e-30);
  const Matrix t = transformation_matrix(1.0, Support(0, 1, 2));
  CHECK(std::abs(t(0, 1) - 0.7788007830714049) < 1e-15);
  CHECK(t(0, 0) == 1.0);
  const Matrix r = transformation_matrix(3.7, Support(-2, 5, 31));
  CHECK(r == r.transpose());
}

TEST_CASE("bias vector") {
  const Support s(0, 1, 2);
  CHECK((bias_vector(BiasParams{}, s).array() == 1.0).all());
  const Vector v = bias_vector(BiasParams{1.0, 0.0, 0.25, 0.0}, s);
  CHECK(v(0) == 1.0);
  CHECK(std::abs(v(1) - 0.7788007830714049) < 1e-15);

  const Support s10(0, 1, 10);
  Eigen::Index arg;
  const Vector peaked = bias_vector(BiasParams{5.0, 0.0, 0.65, 0.0}, s10);
  peaked.maxCoeff(&arg);
  CHECK(arg == 6);
  CHECK(peaked(6) == doctest::Approx(1.0));
}

TEST_CASE("parameter counts") {
  CHECK(count_params(NetworkSpec({3, 10, 10, 1})) == 224);
  CHECK(count_params(NetworkSpec({3, 5, 1})) == 44);
  CHECK(count_params(NetworkSpec({1, 1})) == 5);
  CHECK(error_code_of([] { NetworkSpec({3}); }) == ErrorCode::InvalidArgument);
  CHECK(error_code_of([] { NetworkSpec({3, 0, 1}); }) == ErrorCode::InvalidArgument);
}

TEST_CASE("flatten and unflatten round trip") {
  Rng rng(1);
  const Support s(0, 1, 10);
  const DrnNetwork net = random_network({3, 4, 2}, s, rng);
  const Vector flat = net.flatten();
  CHECK(flat.size() == count_params(net.spec()));
  CHECK(DrnNetwork::unflatten(net.spec(), s, flat).flatten() == flat);
  const auto labels = DrnNetwork::param_labels(net.spec());
  CHECK(labels.size() == static_cast<std::size_t>(flat.size()));
  CHECK(labels[0] == "L1.N0.w0");
  CHECK(labels[3] == "L1.N0.b_q");
  CHECK(labels[6] == "L1.N0.lambda_a");
}

TEST_CASE("propagate node limits") {
  Rng rng(2);
  const Support s(0, 1, 20);
  const auto in = random_distributions(1, s, rng);

  NodeParams flat;
  flat.weights = Vector::Zero(1);
  CHECK(normalize(propagate_node(flat, in), s).mass().isApprox(BinnedDistribution::uniform(s).mass(), 1e-14));

  NodeParams identity;
  identity.weights = Vector::Constant(1, 1e6);
  CHECK((normalize(propagate_node(identity, in), s).mass() - in[0].mass()).cwiseAbs().maxCoeff() < 1e-9);

  CHECK(error_code_of([&] { propagate_node(random_node(2, s, rng), in); }) == ErrorCode::FanInMismatch);
  const auto other = random_distributions(1, Support(0, 2, 20), rng);
  const std::vector<BinnedDistribution> mixed{in[0], other[0]};
  CHECK(error_code_of([&] { propagate_node(random_node(2, s, rng), mixed); }) == ErrorCode::SupportMismatch);
}

TEST_CASE("propagate node matches brute force") {
  Rng rng(42);
  const Support s(-0.5, 1.5, 8);
  const NodeParams node = random_node(2, s, rng);
  const auto in = random_distributions(2, s, rng);
  const Vector fast = propagate_node(node, in);
  const Vector slow = brute_force_node(node, in);
  CHECK(((fast - slow).array().abs() / slow.array().abs()).maxCoeff() < 1e-10);

  const Support s6(0, 1, 6);
  const NodeParams node3 = random_node(3, s6, rng);
  const auto in3 = random_distributions(3, s6, rng);
  const Vector slow3 = brute_force_node(node3, in3);
  CHECK(((propagate_node(node3, in3) - slow3).array().abs() / slow3.array()).maxCoeff() < 1e-10);
}

TEST_CASE("brute force oracle") {
  Rng rng(3);
  const Support s(0, 1, 6);
  NodeParams zero;
  zero.weights = Vector::Zero(3);
  CHECK((brute_force_node(zero, random_distributions(3, s, rng)).array() - 1.0).abs().maxCoeff() < 1e-14);

  const NodeParams one = random_node(1, s, rng);
  const auto in = random_distributions(1, s, rng);
  const Vector expected =
      (transformation_matrix(one.weights(0), s) * in[0].mass()).cwiseProduct(bias_vector(one.bias, s));
  CHECK(brute_force_node(one, in).isApprox(expected, 1e-14));

  CHECK(error_code_of([&] { brute_force_node(random_node(5, s, rng), random_distributions(5, s, rng)); }) ==
        ErrorCode::InstanceTooLarge);
  const Support big(0, 1, 17);
  CHECK(error_code_of([&] { brute_force_node(random_node(1, big, rng), random_distributions(1, big, rng)); }) ==
        ErrorCode::InstanceTooLarge);
}

TEST_CASE("cross-term expansion") {
  Rng rng(11);
  const Support s(0, 1, 4);
  const NodeParams node = random_node(2, s, rng);
  const auto in = random_distributions(2, s, rng);
  const Vector hadamard = propagate_node(node, in);
  CHECK(((cross_term_expansion(node, in) - hadamard).array().abs() / hadamard.array()).maxCoeff() < 1e-12);

  const NodeParams single = random_node(1, s, rng);
  const auto in1 = random_distributions(1, s, rng);
  CHECK(cross_term_expansion(single, in1).isApprox(propagate_node(single, in1), 1e-14));

  NodeParams zero;
  zero.weights = Vector::Zero(3);
  CHECK((cross_term_expansion(zero, random_distributions(3, s, rng)).array() - 1.0).abs().maxCoeff() < 1e-14);
  CHECK(error_code_of([&] { cross_term_expansion(random_node(4, s, rng), random_distributions(4, s, rng)); }) ==
        ErrorCode::InstanceTooLarge);
}

TEST_CASE("linearized node output") {
  Rng rng(12);
  const Support s(0, 1, 20);
  NodeParams node = random_node(2, s, rng);
  const auto in2 = random_distributions(2, s, rng);
  node.weights.setZero();
  CHECK(linearized_node_output(node, in2).mass().isApprox(normalize(propagate_node(node, in2), s).mass(), 1e-15));

  NodeParams small = random_node(1, s, rng);
  small.weights(0) = 1e-4;
  const auto in1 = random_distributions(1, s, rng);
  CHECK((linearized_node_output(small, in1).mass() - normalize(propagate_node(small, in1), s).mass())
            .cwiseAbs()
            .maxCoeff() < 1e-6);
}

TEST_CASE("forward pass") {
  Rng rng(7);
  const Support s(0, 1, 30);

  DrnNetwork chain(NetworkSpec({1, 1, 1}), s);
  chain.node(1, 0).weights(0) = 1e6;
  chain.node(2, 0).weights(0) = 1e6;
  const auto in = random_distributions(1, s, rng);
  CHECK((forward(chain, in).output().mass() - in[0].mass()).cwiseAbs().maxCoeff() < 1e-9);

  DrnNetwork net = random_network({3, 4, 1}, s, rng);
  net.node(2, 0).weights.setZero();
  const Vector a = forward(net, random_distributions(3, s, rng)).output().mass();
  const Vector b = forward(net, random_distributions(3, s, rng)).output().mass();
  CHECK((a - b).cwiseAbs().maxCoeff() < 1e-15);

  const DrnNetwork deep = random_network({3, 10, 10, 1}, s, rng);
  const auto inputs = random_distributions(3, s, rng);
  const ForwardResult r = forward(deep, inputs);
  CHECK(r.trace.activations.size() == 4);
  CHECK(r.trace.activations[1].size() == 10);
  CHECK(r.trace.pre_normalization_totals[2].size() == 10);
  CHECK((r.output().mass() - forward_unnormalized_hidden(deep, inputs).front().mass()).cwiseAbs().maxCoeff() < 1e-9);

  CHECK(error_code_of([&] { forward(deep, random_distributions(2, s, rng)); }) == ErrorCode::FanInMismatch);
}

TEST_CASE("normalization underflow is reported") {
  const Support s(0, 1, 10);
  DrnNetwork net(NetworkSpec({1, 1}), s);
  net.node(1, 0).weights(0) = 1e6;
  net.node(1, 0).bias = {0.0, 1e5, 0.0, 0.0};
  std::vector<double> m(10, 0.0);
  m[9] = 1.0;
  const std::vector<BinnedDistribution> in{test::from_masses(s, m)};
  CHECK(error_code_of([&] { forward(net, in); }) == ErrorCode::NormalizationUnderflow);
}
