#include "helpers.hpp"

#include <cmath>
#include <numeric>

using namespace drn;
using drn::test::error_code_of;
using drn::test::from_masses;

TEST_CASE("bin centers are bin midpoints") {
  const Vector c = bin_centers(Support(0, 1, 4));
  CHECK(c(0) == doctest::Approx(0.125));
  CHECK(c(1) == doctest::Approx(0.375));
  CHECK(c(2) == doctest::Approx(0.625));
  CHECK(c(3) == doctest::Approx(0.875));

  const Vector c100 = bin_centers(Support(0, 1, 100));
  CHECK(c100(0) == doctest::Approx(0.005));
  CHECK(c100(99) == doctest::Approx(0.995));
  CHECK(std::abs(bin_centers(Support(-0.01, 0.1, 100))(0) - -0.00945) < 1e-15);
}

TEST_CASE("support validation and bin lookup") {
  CHECK(error_code_of([] { Support(1, 1, 4); }) == ErrorCode::InvalidArgument);
  CHECK(error_code_of([] { Support(0, 1, 1); }) == ErrorCode::InvalidArgument);
  const Support s(0, 1, 4);
  CHECK(s.bin_index(0.0) == 0);
  CHECK(s.bin_index(0.25) == 1);
  CHECK(s.bin_index(1.0) == 3);
  CHECK(error_code_of([&] { s.bin_index(1.01); }) == ErrorCode::SampleOutOfSupport);
}

TEST_CASE("normalize") {
  const Support s2(0, 1, 2), s4(0, 1, 4);
  CHECK(normalize(Vector::Constant(2, 2.0), s2).mass().isApprox(Vector::Constant(2, 0.5)));
  Vector raw(4);
  raw << 1, 0, 0, 3;
  Vector expected(4);
  expected << 0.25, 0, 0, 0.75;
  CHECK(normalize(raw, s4).mass().isApprox(expected));
  CHECK(error_code_of([&] { normalize(Vector::Zero(2), s2); }) == ErrorCode::NonPositiveTotal);
  CHECK(error_code_of([&] { normalize(Vector::Constant(3, 1.0), s2); }) == ErrorCode::DimensionMismatch);
}

TEST_CASE("binned distribution invariants") {
  const Support s(0, 1, 2);
  CHECK(error_code_of([&] { from_masses(s, {0.6, 0.6}); }) == ErrorCode::InvalidArgument);
  CHECK(error_code_of([&] { from_masses(s, {1.5, -0.5}); }) == ErrorCode::InvalidArgument);
  CHECK(BinnedDistribution::uniform(Support(0, 2, 4)).density().isApprox(Vector::Constant(4, 0.5)));
}

TEST_CASE("discretize gaussian") {
  const Support s(0, 1, 100);
  const auto wide = discretize_gaussian(0.5, 0.1, s);
  Eigen::Index mode;
  wide.mass().maxCoeff(&mode);
  CHECK((mode == 49 || mode == 50));
  for (int i = 0; i < 50; ++i) CHECK(std::abs(wide[i] - wide[99 - i]) < 1e-15);

  // normalized pointwise Gaussian over the 100 centers
  const auto narrow = discretize_gaussian(0.5, 0.01, s);
  CHECK(std::abs(narrow[50] - 0.039844414007157831) < 1e-15);
  CHECK(std::abs(narrow[49] - 0.039844414007157831) < 1e-15);

  CHECK(error_code_of([&] { discretize_gaussian(0.5, 0.0, s); }) == ErrorCode::InvalidArgument);
  CHECK(error_code_of([&] { discretize_gaussian(50.0, 1e-4, s); }) == ErrorCode::DegenerateDensity);
}

TEST_CASE("jensen-shannon divergence") {
  const Support s(0, 1, 2);
  const auto p = from_masses(s, {0.5, 0.5});
  const auto a = from_masses(s, {1, 0});
  const auto b = from_masses(s, {0, 1});
  CHECK(jsd(p, p) == 0.0);
  CHECK(jsd(a, b) == doctest::Approx(std::log(2.0)).epsilon(1e-14));
  CHECK(std::abs(jsd(p, a) - 0.21576155433883565) < 1e-15);
  CHECK(error_code_of([&] { jsd(p, BinnedDistribution::uniform(Support(0, 2, 2))); }) == ErrorCode::SupportMismatch);

  Rng rng(3);
  const Support s30(0, 1, 30);
  for (int i = 0; i < 100; ++i) {
    const auto x = test::random_distribution(s30, rng);
    const auto y = test::random_distribution(s30, rng);
    CHECK(std::abs(jsd(x, y) - jsd(y, x)) < 1e-12);
    CHECK(jsd(x, y) >= 0.0);
    CHECK(jsd(x, y) <= std::log(2.0) + 1e-12);
  }
}

TEST_CASE("l2 distance on densities") {
  const Support s(0, 1, 2);
  const auto a = from_masses(s, {1, 0});
  const auto b = from_masses(s, {0, 1});
  CHECK(l2_distance(a, a) == 0.0);
  CHECK(l2_distance(a, b) == doctest::Approx(2.0).epsilon(1e-14));
  CHECK(l2_distance(a, b) == l2_distance(b, a));

  Rng rng(4);
  const Support s20(-1, 2, 20);
  for (int i = 0; i < 100; ++i) {
    const auto x = test::random_distribution(s20, rng);
    const auto y = test::random_distribution(s20, rng);
    const auto z = test::random_distribution(s20, rng);
    CHECK(l2_distance(x, z) <= l2_distance(x, y) + l2_distance(y, z) + 1e-9);
  }
}

TEST_CASE("negative log-likelihood") {
  const std::vector<double> one{0.3};
  CHECK(nll(BinnedDistribution::uniform(Support(0, 1, 10)), one) == doctest::Approx(0.0));
  CHECK(nll(BinnedDistribution::uniform(Support(0, 2, 10)), one) == doctest::Approx(std::log(2.0)));
  const std::vector<double> two{0.1, 0.9};
  CHECK(std::abs(nll(from_masses(Support(0, 1, 2), {0.75, 0.25}), two) - 0.2876820724517809) < 1e-14);

  const std::vector<double> outside{1.5};
  CHECK(error_code_of([&] { nll(BinnedDistribution::uniform(Support(0, 1, 2)), outside); }) ==
        ErrorCode::SampleOutOfSupport);
  const auto point = from_masses(Support(0, 1, 2), {1, 0});
  try {
    nll(point, std::vector<double>{0.7});
    FAIL("expected ZeroDensityBin");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::ZeroDensityBin);
    CHECK(std::string(e.what()).find("bin 1") != std::string::npos);
  }
}

TEST_CASE("sampling and histogram rebinning") {
  const Support s(0, 1, 10);
  Rng rng(5);
  const auto point = from_masses(s, {0, 0, 0, 1, 0, 0, 0, 0, 0, 0});
  for (double x : sample(point, 200, rng)) {
    CHECK(x >= 0.3);
    CHECK(x < 0.4);
  }
  CHECK(sample(point, 0, rng).empty());

  Rng a(9), b(9);
  CHECK(sample(BinnedDistribution::uniform(s), 50, a) == sample(BinnedDistribution::uniform(s), 50, b));

  const auto many = sample(BinnedDistribution::uniform(s), 1000000, rng);
  CHECK((histogram_rebin(many, s).mass().array() - 0.1).abs().maxCoeff() < 0.005);

  const std::vector<double> same_bin{0.31, 0.32, 0.35};
  CHECK(histogram_rebin(same_bin, s)[3] == 1.0);
  std::vector<double> per_bin;
  for (int i = 0; i < 10; ++i) per_bin.push_back(0.05 + 0.1 * i);
  CHECK(histogram_rebin(per_bin, s).mass().isApprox(Vector::Constant(10, 0.1)));
  CHECK(error_code_of([&] { histogram_rebin(std::vector<double>{}, s); }) == ErrorCode::EmptySamples);
  CHECK(error_code_of([&] { histogram_rebin(std::vector<double>{2.0}, s); }) == ErrorCode::SampleOutOfSupport);

  const Support s100(0, 1, 100);
  const auto g = discretize_gaussian(0.4, 0.01, s100);
  CHECK(jsd(g, histogram_rebin(sample(g, 100000, rng), s100)) < 0.01);
}

TEST_CASE("rebinning error shrinks with sample count") {
  const Support s(0, 1, 100);
  const auto g = discretize_gaussian(0.5, 0.02, s);
  std::vector<double> mean_jsd;
  for (std::size_t n : {100, 1000, 10000}) {
    double total = 0.0;
    for (int seed = 0; seed < 10; ++seed) {
      Rng rng(seed);
      total += jsd(g, histogram_rebin(sample(g, n, rng), s));
    }
    mean_jsd.push_back(total / 10);
  }
  CHECK(mean_jsd[0] > mean_jsd[1]);
  CHECK(mean_jsd[1] > mean_jsd[2]);
}

TEST_CASE("kernel density estimate") {
  const Support s(0, 1, 100);
  const std::vector<double> one{0.3};
  CHECK((kde(one, s, 0.05).mass() - discretize_gaussian(0.3, 0.0025, s).mass()).cwiseAbs().maxCoeff() < 1e-15);
  CHECK(jsd(kde(one, s, 1000.0), BinnedDistribution::uniform(s)) < 1e-9);
  CHECK(error_code_of([&] { kde(std::vector<double>{}, s); }) == ErrorCode::EmptySamples);
  CHECK(error_code_of([&] { kde(std::vector<double>{0.2, 0.2}, s); }) == ErrorCode::ZeroVariance);

  Rng rng(6);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<double> xs(10000);
  for (auto& x : xs) x = normal(rng);
  const double mean = std::accumulate(xs.begin(), xs.end(), 0.0) / xs.size();
  double var = 0.0;
  for (double x : xs) var += (x - mean) * (x - mean);
  var /= xs.size() - 1;
  const Support wide(-8, 8, 100);
  CHECK(jsd(kde(xs, wide), discretize_gaussian(mean, var, wide)) < 0.01);
}

TEST_CASE("operations return valid distributions") {
  Rng rng(8);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const Support s(0, 1, 37);
  for (int i = 0; i < 200; ++i) {
    const auto g = discretize_gaussian(u(rng), 0.001 + u(rng), s);
    CHECK(std::abs(g.mass().sum() - 1.0) < 1e-9);
    CHECK(g.mass().minCoeff() >= 0.0);
    const auto h = histogram_rebin(sample(g, 50, rng), s);
    CHECK(std::abs(h.mass().sum() - 1.0) < 1e-9);
  }
}
