#include "drn/checks.hpp"

#include "drn/data.hpp"
#include "drn/error.hpp"
#include "drn/mlp.hpp"
#include "drn/model.hpp"
#include "drn/oracles.hpp"
#include "drn/recurrent.hpp"
#include "drn/train.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <ostream>
#include <sstream>

namespace drn {

namespace {

CheckResult make_result(std::string suite, std::string name, double max_error, double tolerance,
                        std::string detail = {}) {
  return {std::move(suite), std::move(name), max_error, tolerance, max_error < tolerance, std::move(detail)};
}

BinnedDistribution random_distribution(const Support& support, Rng& rng) {
  std::uniform_real_distribution<double> u(0.05, 1.0);
  Vector raw(support.bins());
  for (auto& v : raw) v = u(rng);
  return normalize(raw, support);
}

Support random_support(int bins, Rng& rng) {
  std::uniform_real_distribution<double> lower(-1.0, 1.0);
  std::uniform_real_distribution<double> length(0.1, 3.0);
  const double lo = lower(rng);
  return Support(lo, lo + length(rng), bins);
}

NodeParams random_node(int fan_in, const Support& support, Rng& rng, std::pair<double, double> weights = {-1.0, 6.0}) {
  std::uniform_real_distribution<double> w(weights.first, weights.second);
  std::uniform_real_distribution<double> mag(0.0, 3.0);
  std::uniform_real_distribution<double> pos(support.lower(), support.upper());
  NodeParams node;
  node.weights.resize(fan_in);
  for (auto& x : node.weights) x = w(rng);
  node.bias = {mag(rng), mag(rng), pos(rng), pos(rng)};
  return node;
}

double max_relative(const Vector& a, const Vector& reference) {
  return ((a - reference).array().abs() / reference.array().abs()).maxCoeff();
}

DrnNetwork random_network(const std::vector<int>& sizes, const Support& support, Rng& rng) {
  DrnNetwork net(NetworkSpec(sizes), support);
  for (int l = 1; l < static_cast<int>(sizes.size()); ++l)
    for (int k = 0; k < sizes[l]; ++k) net.node(l, k) = random_node(sizes[l - 1], support, rng, {0.0, 5.0});
  return net;
}

RdrnParams random_rdrn(int n, int m, const Support& support, Rng& rng) {
  std::uniform_real_distribution<double> w(0.0, 5.0);
  RdrnParams p(n, m, support);
  p.U = p.U.unaryExpr([&](double) { return w(rng); });
  p.W = p.W.unaryExpr([&](double) { return w(rng); });
  p.V = p.V.unaryExpr([&](double) { return w(rng); });
  for (auto& b : p.hidden_bias) b = random_node(0, support, rng).bias;
  p.output_bias = random_node(0, support, rng).bias;
  return p;
}

std::vector<BinnedDistribution> random_inputs(int n, const Support& support, Rng& rng) {
  std::vector<BinnedDistribution> out;
  for (int i = 0; i < n; ++i) out.push_back(random_distribution(support, rng));
  return out;
}

double max_abs_diff(const BinnedDistribution& a, const BinnedDistribution& b) {
  return (a.mass() - b.mass()).cwiseAbs().maxCoeff();
}

}  // namespace

std::vector<CheckResult> oracle_checks() {
  std::vector<CheckResult> out;
  Rng rng(20240101);
  std::uniform_int_distribution<int> bins(2, 10);
  std::uniform_int_distribution<int> fan(1, 3);

  double worst = 0.0;
  for (int trial = 0; trial < 200; ++trial) {
    const Support support = random_support(bins(rng), rng);
    const int fan_in = fan(rng);
    const NodeParams node = random_node(fan_in, support, rng);
    const auto incoming = random_inputs(fan_in, support, rng);
    worst = std::max(worst, max_relative(propagate_node(node, incoming), brute_force_node(node, incoming)));
  }
  out.push_back(make_result("oracle", "propagate_node == brute_force_node (200 instances)", worst, 1e-10));

  worst = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    const Support support = random_support(6, rng);
    const RdrnParams params = random_rdrn(1, 2, support, rng);
    const auto x = random_inputs(1, support, rng);
    const auto h = random_inputs(2, support, rng);
    const auto next = rdrn_step(params, x, h);
    std::vector<BinnedDistribution> incoming = x;
    incoming.insert(incoming.end(), h.begin(), h.end());
    for (int k = 0; k < 2; ++k) {
      NodeParams node;
      node.weights.resize(3);
      node.weights << params.U(k, 0), params.W(k, 0), params.W(k, 1);
      node.bias = params.hidden_bias[k];
      const BinnedDistribution expected = normalize(brute_force_node(node, incoming), support);
      worst = std::max(worst, max_relative(next[k].mass(), expected.mass()));
    }
  }
  out.push_back(make_result("oracle", "rdrn_step == brute_force_node over [x; h]", worst, 1e-10));
  return out;
}

std::vector<CheckResult> property_checks() {
  std::vector<CheckResult> out;
  Rng rng(31337);

  // Zero-weight irrelevance.
  {
    double worst = 0.0;
    for (int trial = 0; trial < 50; ++trial) {
      const Support support = random_support(20, rng);
      NodeParams node = random_node(3, support, rng);
      node.weights(1) = 0.0;
      auto incoming = random_inputs(3, support, rng);
      const auto before = normalize(propagate_node(node, incoming), support);
      incoming[1] = random_distribution(support, rng);
      const auto after = normalize(propagate_node(node, incoming), support);
      worst = std::max(worst, max_abs_diff(before, after));
    }
    out.push_back(make_result("props", "zero weight has no effect on target node", worst, 1e-12));
  }

  // Identity limit at w = 1e4 q^2.
  {
    double worst = 0.0;
    for (int q : {10, 50, 100, 200}) {
      const Support support(0.0, 1.0, q);
      NodeParams node;
      node.weights = Vector::Constant(1, 1e4 * q * q);
      const auto input = random_distribution(support, rng);
      const std::vector<BinnedDistribution> incoming{input};
      worst = std::max(worst, jsd(input, normalize(propagate_node(node, incoming), support)));
    }
    out.push_back(make_result("props", "large weight reproduces input (jsd)", worst, 1e-6));
  }

  // Hidden-layer normalization invariance.
  {
    double worst = 0.0;
    const std::vector<std::vector<int>> shapes{{2, 3, 1}, {3, 4, 4, 1}, {3, 10, 10, 1}, {2, 3, 5, 3, 1}, {1, 2, 2, 2, 2}};
    for (const auto& sizes : shapes) {
      for (int trial = 0; trial < 4; ++trial) {
        const Support support = random_support(40, rng);
        const DrnNetwork net = random_network(sizes, support, rng);
        const auto inputs = random_inputs(sizes.front(), support, rng);
        const auto normalized = forward(net, inputs).outputs;
        const auto raw = forward_unnormalized_hidden(net, inputs);
        for (std::size_t o = 0; o < raw.size(); ++o) worst = std::max(worst, max_abs_diff(normalized[o], raw[o]));
      }
    }
    out.push_back(make_result("props", "output invariant to hidden normalization", worst, 1e-9));
  }

  // Scaling invariance of inputs.
  {
    double worst = 0.0;
    const NetworkSpec spec({3, 4, 1});
    for (int trial = 0; trial < 10; ++trial) {
      const Support support = random_support(30, rng);
      const DrnNetwork net = random_network(spec.layer_sizes(), support, rng);
      GraphEvaluator evaluator(make_drn_graph(spec), support);
      std::vector<Matrix> inputs;
      for (const auto& p : random_inputs(3, support, rng)) inputs.push_back(p.mass());
      const Matrix reference = evaluator.evaluate(net.flatten(), inputs).front();
      for (double c : {0.1, 10.0}) {
        for (std::size_t i = 0; i < inputs.size(); ++i) {
          auto scaled = inputs;
          scaled[i] *= c;
          worst = std::max(worst, (evaluator.evaluate(net.flatten(), scaled).front() - reference).cwiseAbs().maxCoeff());
        }
      }
    }
    out.push_back(make_result("props", "output invariant to input scaling", worst, 1e-9));
  }

  // Cross-term expansion.
  {
    double worst = 0.0;
    std::uniform_int_distribution<int> bins(2, 8);
    std::uniform_int_distribution<int> fan(1, 3);
    for (int trial = 0; trial < 100; ++trial) {
      const Support support = random_support(bins(rng), rng);
      const NodeParams node = random_node(fan(rng), support, rng);
      const auto incoming = random_inputs(node.fan_in(), support, rng);
      worst = std::max(worst, max_relative(cross_term_expansion(node, incoming), propagate_node(node, incoming)));
    }
    out.push_back(make_result("props", "cross-term expansion equals Hadamard form", worst, 1e-12));
  }

  // First-order expansion in small weights: error shrinks ~4x when w halves.
  {
    double lo = 1e300, hi = 0.0;
    for (int trial = 0; trial < 20; ++trial) {
      const Support support = random_support(20, rng);
      NodeParams node = random_node(1 + trial % 3, support, rng, {0.005, 0.02});
      const auto incoming = random_inputs(node.fan_in(), support, rng);
      auto deviation = [&](const NodeParams& n) {
        return max_abs_diff(linearized_node_output(n, incoming), normalize(propagate_node(n, incoming), support));
      };
      const double full = deviation(node);
      node.weights /= 2.0;
      const double ratio = full / deviation(node);
      lo = std::min(lo, ratio);
      hi = std::max(hi, ratio);
    }
    std::ostringstream detail;
    detail << "error ratio under weight halving in [" << lo << ", " << hi << "], required [3, 5]";
    const double excess = std::max({0.0, 3.0 - lo, hi - 5.0});
    out.push_back(make_result("props", "linearization error is second order in w", excess, 1e-300, detail.str()));
    out.back().passed = lo >= 3.0 && hi <= 5.0;
  }

  // Symmetry of T_w.
  {
    double worst = 0.0;
    for (double w : {-0.5, 0.0, 1.0, 37.0, 1e4}) {
      const Matrix t = transformation_matrix(w, random_support(25, rng));
      worst = std::max(worst, (t - t.transpose()).cwiseAbs().maxCoeff());
    }
    out.push_back(make_result("props", "transformation matrix is symmetric", worst, 1e-300));
    out.back().passed = worst == 0.0;
  }

  // Recurrent network equals its tied-weight unrolling.
  {
    double worst = 0.0;
    for (int steps = 1; steps <= 5; ++steps) {
      const Support support = random_support(30, rng);
      const int n = 1 + steps % 2, m = 2 + steps % 3;
      const RdrnParams params = random_rdrn(n, m, support, rng);
      Sequence seq;
      for (int t = 0; t < steps; ++t) seq.push_back(random_inputs(n, support, rng));
      const auto recurrent = rdrn_forward(params, seq);
      std::vector<BinnedDistribution> flat(m, BinnedDistribution::uniform(support));
      for (const auto& step : seq) flat.insert(flat.end(), step.begin(), step.end());
      const auto unrolled = forward(unroll_rdrn(params, steps), flat).output();
      worst = std::max(worst, max_abs_diff(recurrent, unrolled));
    }
    out.push_back(make_result("props", "rdrn_forward equals unrolled network", worst, 1e-9));
  }

  // Batched graph evaluation agrees with the per-node forward pass.
  {
    double worst = 0.0;
    const Support support(0.0, 1.0, 50);
    ShiftingGaussianConfig sg;
    sg.samples = 4;
    sg.bins = 50;
    const Dataset data = gen_shifting_gaussian(sg, rng);
    DrnModel drn(NetworkSpec({3, 4, 1}), support);
    drn.initialize({}, rng);
    const Matrix batched = drn.predict(drn.prepare(data));
    RdrnModel rdrn(1, 3, 3, support);
    rdrn.initialize({}, rng);
    const Matrix batched_r = rdrn.predict(rdrn.prepare(data));
    const DrnNetwork net = drn.network();
    const RdrnParams rp = rdrn.rdrn_params();
    for (std::size_t c = 0; c < data.size(); ++c) {
      std::vector<BinnedDistribution> flat;
      for (const auto& step : data[c].inputs) flat.push_back(step.front());
      worst = std::max(worst, (forward(net, flat).output().mass() - batched.col(c)).cwiseAbs().maxCoeff());
      worst = std::max(worst, (rdrn_forward(rp, data[c].inputs).mass() - batched_r.col(c)).cwiseAbs().maxCoeff());
    }
    out.push_back(make_result("props", "batched log-domain evaluation equals forward", worst, 1e-12));
  }

  // Shared weights are not permutation invariant over time unless W = 0.
  {
    double min_change = 1e300, max_memoryless = 0.0;
    for (int trial = 0; trial < 10; ++trial) {
      const Support support = random_support(30, rng);
      RdrnParams params = random_rdrn(1, 3, support, rng);
      Sequence seq;
      for (int t = 0; t < 3; ++t) seq.push_back(random_inputs(1, support, rng));
      Sequence swapped = seq;
      std::swap(swapped[0], swapped[1]);
      min_change = std::min(min_change, max_abs_diff(rdrn_forward(params, seq), rdrn_forward(params, swapped)));
      params.W.setZero();
      max_memoryless =
          std::max(max_memoryless, max_abs_diff(rdrn_forward(params, seq), rdrn_forward(params, swapped)));
    }
    std::ostringstream detail;
    detail << "min change with W != 0: " << min_change;
    out.push_back(make_result("props", "time order matters only through W", max_memoryless, 1e-12, detail.str()));
    out.back().passed = max_memoryless < 1e-12 && min_change > 1e-9;
  }
  return out;
}

std::vector<CheckResult> gradient_checks(const CheckOptions& options) {
  constexpr double kStep = 1e-5;
  struct Case {
    std::string name;
    std::unique_ptr<Model> model;
    InitRanges init;
  };
  std::vector<Case> cases;
  auto sg_support = [](int q) { return Support(0.0, 1.0, q); };
  const InitRanges wide{{0.0, 20.0}, {0.0, 3.0}};
  const InitRanges signed_weights{{-1.0, 4.0}, {0.0, 2.0}};

  cases.push_back({"drn [1,1] q=12", std::make_unique<DrnModel>(NetworkSpec({1, 1}), sg_support(12)), {}});
  cases.push_back({"drn [3,1] q=20", std::make_unique<DrnModel>(NetworkSpec({3, 1}), sg_support(20)), wide});
  cases.push_back({"drn [2,2,1] q=16", std::make_unique<DrnModel>(NetworkSpec({2, 2, 1}), sg_support(16)), signed_weights});
  cases.push_back({"drn [3,5,1] q=30", std::make_unique<DrnModel>(NetworkSpec({3, 5, 1}), sg_support(30)), {}});
  cases.push_back({"drn [3,5,1] q=30 wide", std::make_unique<DrnModel>(NetworkSpec({3, 5, 1}), sg_support(30)), wide});
  cases.push_back({"drn [3,4,4,1] q=25", std::make_unique<DrnModel>(NetworkSpec({3, 4, 4, 1}), sg_support(25)), {}});
  cases.push_back({"drn [2,3,3,3,1] q=20", std::make_unique<DrnModel>(NetworkSpec({2, 3, 3, 3, 1}), sg_support(20)), {}});
  cases.push_back({"drn [3,10,10,1] q=100", std::make_unique<DrnModel>(NetworkSpec({3, 10, 10, 1}), sg_support(100)), {}});
  cases.push_back({"drn [1,2,1] q=40 wide", std::make_unique<DrnModel>(NetworkSpec({1, 2, 1}), sg_support(40)), wide});
  cases.push_back({"drn [3,1,1] q=100 wide", std::make_unique<DrnModel>(NetworkSpec({3, 1, 1}), sg_support(100)), wide});
  cases.push_back({"rdrn n=1 m=5 T=3 q=30", std::make_unique<RdrnModel>(1, 5, 3, sg_support(30)), {}});
  cases.push_back({"rdrn n=1 m=5 T=3 q=100", std::make_unique<RdrnModel>(1, 5, 3, sg_support(100)), {}});
  cases.push_back({"rdrn n=1 m=2 T=1 q=20", std::make_unique<RdrnModel>(1, 2, 1, sg_support(20)), wide});
  cases.push_back({"rdrn n=1 m=3 T=2 q=20", std::make_unique<RdrnModel>(1, 3, 2, sg_support(20)), signed_weights});
  cases.push_back({"rdrn n=1 m=1 T=3 q=25", std::make_unique<RdrnModel>(1, 1, 3, sg_support(25)), wide});
  cases.push_back({"mlp [30,3,10] q=10", std::make_unique<MlpModel>(std::vector<int>{30, 3, 10}, sg_support(10)), {}});
  cases.push_back({"mlp [60,20] q=20", std::make_unique<MlpModel>(std::vector<int>{60, 20}, sg_support(20)), {}});
  cases.push_back({"mlp [45,5,5,15] q=15", std::make_unique<MlpModel>(std::vector<int>{45, 5, 5, 15}, sg_support(15)), {}});
  cases.push_back({"mlp [20,4,10] q=10 T=2", std::make_unique<MlpModel>(std::vector<int>{20, 4, 10}, sg_support(10)), {}});
  cases.push_back({"mlp [300,3,100] q=100", std::make_unique<MlpModel>(std::vector<int>{300, 3, 100}, sg_support(100)), {}});

  std::vector<CheckResult> out;
  Rng rng(4242);
  for (auto& c : cases) {
    Model& model = *c.model;
    ShiftingGaussianConfig sg;
    sg.samples = 3;
    sg.steps = model.history();
    sg.bins = model.support().bins();
    sg.variance = 0.02;
    const Dataset data = gen_shifting_gaussian(sg, rng);
    model.initialize(c.init, rng);
    if (model.kind() == "mlp") {
      // non-zero biases so every parameter is exercised
      Vector p = model.params();
      std::uniform_real_distribution<double> u(-0.5, 0.5);
      for (auto& v : p) v += u(rng);
      model.set_params(p);
    }

    // |s - lambda_a| is not differentiable at bin centers; keep the stencil clear of them.
    {
      const auto labels = model.param_labels();
      const Support& support = model.support();
      Vector p = model.params();
      for (Eigen::Index i = 0; i < p.size(); ++i) {
        if (!labels[i].ends_with("lambda_a")) continue;
        const double offset = (p(i) - support.lower()) / support.bin_width() - 0.5;
        if (std::abs(offset - std::round(offset)) * support.bin_width() < 100 * kStep) p(i) += 0.5 * support.bin_width();
      }
      model.set_params(p);
    }

    Vector analytic = gradient(model, data);
    if (options.corrupt_gradient) options.corrupt_gradient(analytic);
    const Vector numeric = finite_diff_gradient(model, data, kStep);
    const Vector err = ((analytic - numeric).array().abs() / numeric.array().abs().max(1.0)).matrix();
    Eigen::Index worst_index = 0;
    const double worst = err.maxCoeff(&worst_index);
    const auto labels = model.param_labels();
    std::ostringstream detail;
    detail << "worst component " << labels[worst_index] << " analytic " << analytic(worst_index) << " numeric "
           << numeric(worst_index) << " (" << model.param_count() << " params)";
    out.push_back(make_result("gradcheck", c.name, worst, 1e-4, detail.str()));
  }
  return out;
}

std::vector<CheckResult> run_checks(const std::string& suite, const CheckOptions& options) {
  std::vector<CheckResult> out;
  auto append = [&](std::vector<CheckResult> r) { out.insert(out.end(), r.begin(), r.end()); };
  if (suite == "oracle" || suite == "all") append(oracle_checks());
  if (suite == "props" || suite == "all") append(property_checks());
  if (suite == "gradcheck" || suite == "all") append(gradient_checks(options));
  if (suite != "oracle" && suite != "props" && suite != "gradcheck" && suite != "all") {
    throw Error(ErrorCode::InvalidArgument, "unknown check suite '" + suite + "'");
  }
  return out;
}

void print_checks(std::ostream& out, const std::vector<CheckResult>& results) {
  const auto old = out.precision(3);
  for (const auto& r : results) {
    out << (r.passed ? "PASS " : "FAIL ") << std::left << std::setw(10) << r.suite << ' ' << r.name
        << "  max_error=" << std::scientific << r.max_error << " tol=" << r.tolerance << std::defaultfloat;
    if (!r.detail.empty()) out << "  [" << r.detail << ']';
    out << '\n';
  }
  out.precision(old);
}

bool all_passed(const std::vector<CheckResult>& results) {
  return std::all_of(results.begin(), results.end(), [](const CheckResult& r) { return r.passed; });
}

}  // namespace drn
