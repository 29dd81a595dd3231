#include "drn/data.hpp"
#include "drn/model.hpp"
#include "drn/train.hpp"

#include "helpers.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

using namespace drn;
using drn::test::error_code_of;

namespace {

// Targets equal the last input, so a single node with a large weight fits them.
Dataset identity_task(int n, std::uint64_t seed) {
  Rng rng(seed);
  const Dataset sg = gen_shifting_gaussian({.samples = n, .steps = 1}, rng);
  Dataset d(sg.support(), 1, 1);
  for (const auto& s : sg.samples()) d.add({s.inputs, s.inputs.back()[0], {}});
  return d;
}

Dataset sg_task(int n, std::uint64_t seed) {
  Rng rng(seed);
  ShiftingGaussianConfig config;
  config.samples = n;
  config.bins = 20;
  return gen_shifting_gaussian(config, rng);
}

}  // namespace

TEST_CASE("config validation") {
  TrainConfig c;
  CHECK_NOTHROW(c.validate());
  c.learning_rate = 0.0;
  CHECK(error_code_of([&] { c.validate(); }) == ErrorCode::InvalidArgument);
  c = {};
  c.max_epochs = -1;
  CHECK(error_code_of([&] { c.validate(); }) == ErrorCode::InvalidArgument);
  c = {};
  c.init.weight = {2.0, 1.0};
  CHECK(error_code_of([&] { c.validate(); }) == ErrorCode::InvalidArgument);
}

TEST_CASE("zero epochs leave the initialized parameters") {
  const Dataset d = sg_task(5, 1);
  DrnModel model(NetworkSpec({3, 2, 1}), d.support());
  TrainConfig config;
  config.max_epochs = 0;
  config.seed = 4;
  const TrainReport report = train(model, d, d, config);
  CHECK(report.train_loss.empty());
  CHECK(report.best_epoch == -1);
  DrnModel fresh(NetworkSpec({3, 2, 1}), d.support());
  Rng rng(4);
  fresh.initialize(config.init, rng);
  CHECK(model.params() == fresh.params());
}

TEST_CASE("identity task is learned") {
  const Dataset train_set = identity_task(20, 1), val_set = identity_task(20, 2);
  DrnModel model(NetworkSpec({1, 1}), train_set.support());
  TrainConfig config;
  config.learning_rate = 0.5;
  config.max_epochs = 500;
  config.seed = 1;
  config.init.weight = {0.0, 100.0};
  const TrainReport report = train(model, train_set, val_set, config);
  CHECK(report.train_loss.size() <= 500);
  CHECK(evaluate(model, val_set).jsd_mean < 1e-3);
}

TEST_CASE("best epoch is kept") {
  const Dataset tr = sg_task(10, 3), va = sg_task(10, 4);
  DrnModel model(NetworkSpec({3, 2, 1}), tr.support());
  TrainConfig config;
  config.learning_rate = 0.05;
  config.max_epochs = 200;
  config.patience = 20;
  config.seed = 2;
  const TrainReport report = train(model, tr, va, config);
  REQUIRE(report.best_epoch >= 0);
  const auto min = std::min_element(report.val_loss.begin(), report.val_loss.end());
  CHECK(min - report.val_loss.begin() == report.best_epoch);
  CHECK(model.loss(model.prepare(va)) == doctest::Approx(report.best_val_loss).epsilon(1e-12));
  CHECK(static_cast<int>(report.val_loss.size()) <= std::max(report.best_epoch + 1 + config.patience, 1));

  std::ostringstream csv;
  report.write_csv(csv);
  CHECK(csv.str().rfind("epoch,train_loss,val_loss\n0,", 0) == 0);
}

TEST_CASE("training is deterministic") {
  const Dataset tr = sg_task(8, 5), va = sg_task(8, 6);
  TrainConfig config;
  config.learning_rate = 0.01;
  config.max_epochs = 50;
  config.seed = 9;
  for (int batch : {0, 3}) {
    config.batch_size = batch;
    RdrnModel a(1, 2, 3, tr.support()), b(1, 2, 3, tr.support());
    const auto ra = train(a, tr, va, config);
    const auto rb = train(b, tr, va, config);
    CHECK(a.params() == b.params());
    CHECK(ra.val_loss == rb.val_loss);
  }
}

TEST_CASE("duplicating the training set leaves full-batch training unchanged") {
  const Dataset tr = sg_task(6, 7), va = sg_task(6, 8);
  Dataset twice(tr.support(), tr.steps(), 1);
  for (int k = 0; k < 2; ++k)
    for (const auto& s : tr.samples()) twice.add(s);
  TrainConfig config;
  config.learning_rate = 0.01;
  config.max_epochs = 30;
  config.seed = 3;
  DrnModel a(NetworkSpec({3, 2, 1}), tr.support()), b(NetworkSpec({3, 2, 1}), tr.support());
  const auto ra = train(a, tr, va, config);
  const auto rb = train(b, twice, va, config);
  REQUIRE(ra.train_loss.size() == rb.train_loss.size());
  for (std::size_t i = 0; i < ra.train_loss.size(); ++i)
    CHECK(ra.train_loss[i] == doctest::Approx(rb.train_loss[i]).epsilon(1e-9));
  CHECK((a.params() - b.params()).cwiseAbs().maxCoeff() < 1e-6);
}

TEST_CASE("central differences") {
  Vector a(3), x(3);
  a << 1.5, -2.0, 0.25;
  x << 0.1, 0.2, 0.3;
  const Vector g = central_difference([&](const Vector& v) { return a.dot(v); }, x, 1e-5);
  CHECK((g - a).cwiseAbs().maxCoeff() < 1e-9);
  const Vector q = central_difference([](const Vector& v) { return v.squaredNorm(); }, x, 1e-5);
  CHECK((q - 2 * x).cwiseAbs().maxCoeff() < 1e-9);

  const Dataset d = sg_task(4, 10);
  DrnModel model(NetworkSpec({3, 2, 1}), d.support());
  Rng rng(1);
  model.initialize({}, rng);
  const Vector analytic = gradient(model, d);
  const Vector numeric = finite_diff_gradient(model, d, 1e-6);
  CHECK((analytic - numeric).cwiseAbs().maxCoeff() < 1e-6);
  CHECK(dataset_loss(model, d) == doctest::Approx(model.loss(model.prepare(d))));
}

TEST_CASE("initialization") {
  const Support s(-0.01, 0.1, 100);
  const NetworkSpec spec({3, 5, 1});
  InitRanges ranges;
  ranges.weight = {2.0, 3.0};
  Rng a(1), b(1);
  const Vector pa = init_drn_params(spec, s, ranges, a), pb = init_drn_params(spec, s, ranges, b);
  CHECK(pa == pb);
  const auto labels = DrnNetwork::param_labels(spec);
  for (Eigen::Index i = 0; i < pa.size(); ++i) {
    const std::string& l = labels[static_cast<std::size_t>(i)];
    if (l.find("lambda") != std::string::npos) {
      CHECK(pa(i) >= s.lower());
      CHECK(pa(i) <= s.upper());
    } else if (l.find(".w") != std::string::npos) {
      CHECK(pa(i) >= 2.0);
      CHECK(pa(i) <= 3.0);
    } else {
      CHECK(pa(i) >= 0.0);
      CHECK(pa(i) <= 1.0);
    }
  }
  Rng r(2);
  const Vector pr = init_rdrn_params(1, 5, s, ranges, r);
  CHECK(pr.size() == 59);
  const auto rlabels = RdrnParams::param_labels(1, 5);
  for (Eigen::Index i = 0; i < pr.size(); ++i)
    if (rlabels[static_cast<std::size_t>(i)].find("lambda") != std::string::npos) CHECK(s.contains(pr(i)));
}

TEST_CASE("identity task training loss is non-increasing after epoch 10") {
  int monotone = 0;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const Dataset tr = identity_task(20, seed), va = identity_task(20, seed + 100);
    DrnModel model(NetworkSpec({1, 1}), tr.support());
    TrainConfig config;
    config.max_epochs = 100;
    config.patience = 100;
    config.seed = seed;
    const auto report = train(model, tr, va, config);
    bool ok = true;
    for (std::size_t e = 11; e < report.train_loss.size(); ++e) ok = ok && report.train_loss[e] <= report.train_loss[e - 1];
    monotone += ok;
  }
  CHECK(monotone >= 8);
}

TEST_CASE("evaluation metrics") {
  const Dataset d = identity_task(5, 3);
  DrnModel model(NetworkSpec({1, 1}), d.support());
  Vector p = Vector::Zero(5);
  p(0) = 1e6;
  model.set_params(p);
  Metrics m = evaluate(model, d);
  CHECK(m.jsd_mean < 1e-12);
  CHECK(m.l2_mean < 1e-6);

  std::vector<std::vector<double>> samples(5, std::vector<double>{0.5});
  add_nll(m, model, d, samples);
  REQUIRE(m.nll_mean.has_value());
  CHECK(std::isfinite(*m.nll_mean));
  samples.pop_back();
  CHECK(error_code_of([&] { add_nll(m, model, d, samples); }) == ErrorCode::DimensionMismatch);
}
