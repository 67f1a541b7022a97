#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "rieszdr/synthetic.hpp"
#include "test_support.hpp"

using namespace rieszdr;

TEST_CASE("a flat propensity design has the balanced-arm truth") {
  SyntheticDesign design = SyntheticDesign::no_confounding();
  const SyntheticOracle oracle(design);
  for (int i = 0; i < 20; ++i) {
    const Eigen::VectorXd x = testsup::random_vector(2, 100 + i);
    CHECK(oracle.e0(x) == 0.5);
    CHECK(oracle.alpha(1, x) == 2.0);
    CHECK(oracle.alpha(0, x) == -2.0);
  }
}

TEST_CASE("a homogeneous effect pins the truth exactly") {
  SyntheticDesign design = SyntheticDesign::default_confounded();
  design.tau_base = 1.0;
  design.gamma1.setZero();
  CHECK(SyntheticOracle(design).tau0() == 1.0);
}

TEST_CASE("oracle identities hold pointwise on a grid") {
  const SyntheticOracle oracle(SyntheticDesign::default_confounded());
  std::mt19937_64 rng(7);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (int i = 0; i < 1000; ++i) {
    Eigen::VectorXd x(2);
    x << normal(rng), normal(rng);
    const double e = oracle.e0(x);
    CHECK(std::abs(oracle.r1(x) * e - 1.0) <= 1e-12);
    CHECK(std::abs(oracle.r0(x) * (1.0 - e) - 1.0) <= 1e-12);
    CHECK(oracle.alpha(1, x) == oracle.r1(x));
    CHECK(oracle.alpha(0, x) == -oracle.r0(x));
    CHECK(oracle.alpha(1, x) > 1.0);
    CHECK(oracle.alpha(0, x) < -1.0);
    CHECK(e >= oracle.design().eps);
    CHECK(e <= 1.0 - oracle.design().eps);
  }
}

TEST_CASE("representer moment identity holds in monte carlo") {
  // E[alpha0(D,X) a(D,X)] = E[a(1,X)] - E[a(0,X)] for a test function a
  const SyntheticDesign design = SyntheticDesign::default_confounded();
  auto [data, oracle] = generate(design, 100000, 9);

  auto test_fn = [](int d, const Eigen::VectorXd& x) {
    return 0.7 + 0.4 * x(0) - 0.9 * x(1) + d * (1.1 - 0.3 * x(0));
  };
  Eigen::VectorXd lhs_terms(data.n());
  Eigen::VectorXd rhs_terms(data.n());
  for (Eigen::Index i = 0; i < data.n(); ++i) {
    const Eigen::VectorXd x = data.x().row(i).transpose();
    const int d = static_cast<int>(data.d()(i));
    lhs_terms(i) = oracle.alpha(d, x) * test_fn(d, x);
    rhs_terms(i) = test_fn(1, x) - test_fn(0, x);
  }
  const double n = static_cast<double>(data.n());
  const Eigen::VectorXd diff = lhs_terms - rhs_terms;
  const double gap = diff.mean();
  const double se = std::sqrt((diff.array() - gap).square().sum() / n) / std::sqrt(n);
  CHECK(std::abs(gap) <= 4.0 * se);
}

TEST_CASE("binned treatment frequency tracks the propensity") {
  SyntheticDesign design = SyntheticDesign::default_confounded();
  design.beta = Eigen::VectorXd::Constant(1, 1.0);
  design.gamma0 = Eigen::VectorXd::Constant(1, 1.0);
  design.gamma1 = Eigen::VectorXd::Zero(1);
  auto [data, oracle] = generate(design, 40000, 10);

  // bins over the propensity index
  const int bins = 8;
  std::vector<double> hits(bins, 0.0), count(bins, 0.0), esum(bins, 0.0);
  for (Eigen::Index i = 0; i < data.n(); ++i) {
    const Eigen::VectorXd x = data.x().row(i).transpose();
    int b = static_cast<int>(std::floor((x(0) + 2.0) / 0.5));
    if (b < 0 || b >= bins) continue;
    hits[b] += data.d()(i);
    count[b] += 1.0;
    esum[b] += oracle.e0(x);
  }
  for (int b = 0; b < bins; ++b) {
    REQUIRE(count[b] > 200);
    const double phat = hits[b] / count[b];
    const double ebar = esum[b] / count[b];
    const double binom_se = std::sqrt(ebar * (1.0 - ebar) / count[b]);
    CHECK(std::abs(phat - ebar) <= 4.0 * binom_se);
  }
}

TEST_CASE("generation is deterministic and respects the arm invariant") {
  const SyntheticDesign design = SyntheticDesign::default_confounded();
  auto [a, oa] = generate(design, 500, 11);
  auto [b, ob] = generate(design, 500, 11);
  CHECK(a.x() == b.x());
  CHECK(a.d() == b.d());
  CHECK(a.y() == b.y());
  CHECK(a.arm_count(1) > 0);
  CHECK(a.arm_count(0) > 0);
}

TEST_CASE("single-arm draws are retried with the next seed and a warning") {
  // a nearly deterministic propensity and a tiny sample: some seed draws all
  // treated, and the generator must retry rather than return it
  SyntheticDesign design = SyntheticDesign::default_confounded();
  design.intercept = 8.0;  // e0 pinned at 1 - eps everywhere
  design.eps = 0.02;
  bool saw_retry = false;
  for (std::uint64_t seed = 0; seed < 200 && !saw_retry; ++seed) {
    std::vector<std::string> warnings;
    auto [data, oracle] = generate(design, 4, seed, &warnings);
    CHECK(data.arm_count(0) > 0);
    CHECK(data.arm_count(1) > 0);
    saw_retry = !warnings.empty();
  }
  CHECK(saw_retry);
}

TEST_CASE("degenerate overlap bounds are rejected") {
  SyntheticDesign design = SyntheticDesign::default_confounded();
  design.eps = 0.7;
  CHECK_THROWS_AS(generate(design, 100, 1), DegenerateDesign);
  design.eps = 0.0;
  CHECK_THROWS_AS(generate(design, 100, 1), DegenerateDesign);
}

TEST_CASE("shifted-gaussian pairs carry their analytic ratio") {
  // no shift: the ratio is one everywhere
  auto [same, oracle0] = generate_two_sample(Eigen::VectorXd::Zero(2), 50, 50, 12);
  for (int i = 0; i < 10; ++i) {
    CHECK(oracle0.ratio(testsup::random_vector(2, 200 + i)) == 1.0);
  }

  // shift 0.5 in one dimension: r0(x) = exp(0.5 x - 0.125)
  auto [pair, oracle] = generate_two_sample(Eigen::VectorXd::Constant(1, 0.5), 50, 50, 13);
  for (double x : {-1.0, 0.0, 0.4, 2.0}) {
    CHECK(oracle.ratio(Eigen::VectorXd::Constant(1, x)) ==
          doctest::Approx(std::exp(0.5 * x - 0.125)).epsilon(1e-14));
  }
  CHECK(oracle.kl_gap() == doctest::Approx(0.125));

  // the large-gap regime used by the telescoping study
  const Eigen::VectorXd big = Eigen::VectorXd::Constant(1, std::sqrt(32.0));
  CHECK(GaussianShiftOracle(big).kl_gap() == doctest::Approx(16.0));

  CHECK(pair.n_de() == 50);
  CHECK(pair.n_nu() == 50);
}

TEST_CASE("the default design genuinely confounds the naive contrast") {
  // difference of means over replications sits several monte carlo standard
  // errors away from the truth
  const SyntheticDesign design = SyntheticDesign::default_confounded();
  const int reps = 200;
  Eigen::VectorXd naive(reps);
  for (int rep = 0; rep < reps; ++rep) {
    auto [data, oracle] = generate(design, 400, 5000 + rep);
    double s1 = 0.0, s0 = 0.0, n1 = 0.0, n0 = 0.0;
    for (Eigen::Index i = 0; i < data.n(); ++i) {
      if (data.d()(i) == 1.0) {
        s1 += data.y()(i);
        n1 += 1.0;
      } else {
        s0 += data.y()(i);
        n0 += 1.0;
      }
    }
    naive(rep) = s1 / n1 - s0 / n0;
  }
  const double mean = naive.mean();
  const double mc_se =
      std::sqrt((naive.array() - mean).square().sum() / (reps - 1.0)) / std::sqrt(reps);
  CHECK(std::abs(mean - 1.0) > 3.0 * mc_se);
}
