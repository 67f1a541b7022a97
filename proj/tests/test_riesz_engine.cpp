#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "rieszdr/riesz.hpp"
#include "rieszdr/synthetic.hpp"
#include "test_support.hpp"

using namespace rieszdr;
using testsup::constant_model;

namespace {

RieszModel constant_heads(double r1, double r0, Eigen::Index dim = 1) {
  return RieszModel(constant_model(dim, r1), constant_model(dim, r0));
}

}  // namespace

TEST_CASE("representer risk closed forms") {
  const auto data = testsup::random_observational(12, 1, 80);
  // alpha(1,.) = 1, alpha(0,.) = -1: each row contributes -2 * 2 + 1 = -3
  CHECK(riesz_empirical_risk(constant_heads(1.0, 1.0), data).value ==
        doctest::Approx(-3.0).epsilon(1e-13));
  // the zero representer has zero risk
  CHECK(riesz_empirical_risk(constant_heads(0.0, 0.0), data).value == 0.0);
  // the balanced-arm truth alpha = +-2 gives -2 * 4 + 4 = -4 = -E[alpha^2]
  CHECK(riesz_empirical_risk(constant_heads(2.0, 2.0), data).value ==
        doctest::Approx(-4.0).epsilon(1e-13));
}

TEST_CASE("paired ratio risk closed forms") {
  const auto data = testsup::random_observational(12, 1, 81);
  const auto one = constant_model(1, 1.0);
  const auto zero = constant_model(1, 0.0);
  const auto two = constant_model(1, 2.0);
  CHECK(paired_lsif_risk(one, one, data).value == doctest::Approx(-3.0).epsilon(1e-13));
  CHECK(paired_lsif_risk(zero, zero, data).value == 0.0);
  CHECK(paired_lsif_risk(two, two, data).value == doctest::Approx(-4.0).epsilon(1e-13));
}

TEST_CASE("the two objective routes agree exactly on random models") {
  for (int trial = 0; trial < 100; ++trial) {
    const auto data = testsup::random_observational(20 + trial % 11, 2, 900 + trial);
    const BasisExpansion basis = BasisExpansion::polynomial(2, 2);
    const RatioModel r1(basis, Link::Identity, testsup::random_vector(basis.dim(), 2 * trial));
    const RatioModel r0(basis, Link::Identity,
                        testsup::random_vector(basis.dim(), 2 * trial + 1));
    const double paired = paired_lsif_risk(r1, r0, data, false).value;
    const double via_alpha =
        riesz_empirical_risk(alpha_from_ratios(r1, r0), data, false).value;
    CHECK(testsup::rel_err(paired, via_alpha) <= 1e-12);
  }
}

TEST_CASE("head conversions are exact inverses") {
  // constant heads at 2 give alpha(1,x) = 2, alpha(0,x) = -2
  const RieszModel alpha = alpha_from_ratios(constant_model(1, 2.0), constant_model(1, 2.0));
  const Eigen::VectorXd x = Eigen::VectorXd::Zero(1);
  CHECK(alpha.alpha(1, x) == 2.0);
  CHECK(alpha.alpha(0, x) == -2.0);

  // heads equal to the inverse propensities reproduce d/e - (1-d)/(1-e)
  // pointwise for a logistic e(x)
  const BasisExpansion basis = BasisExpansion::polynomial(1, 1);
  for (double xv : {-2.0, -0.5, 0.0, 0.7, 1.9}) {
    const double e = 1.0 / (1.0 + std::exp(-xv));
    const RieszModel heads = alpha_from_ratios(constant_model(1, 1.0 / e),
                                               constant_model(1, 1.0 / (1.0 - e)));
    Eigen::VectorXd xx(1);
    xx << xv;
    CHECK(heads.alpha(1, xx) == doctest::Approx(1.0 / e).epsilon(1e-14));
    CHECK(heads.alpha(0, xx) == doctest::Approx(-1.0 / (1.0 - e)).epsilon(1e-14));
  }

  // round trip on random coefficients is exact
  const RatioModel m1(basis, Link::Exp, testsup::random_vector(2, 5));
  const RatioModel m0(basis, Link::Identity, testsup::random_vector(2, 6));
  const auto [back1, back0] = ratios_from_alpha(alpha_from_ratios(m1, m0));
  CHECK(back1.theta() == m1.theta());
  CHECK(back0.theta() == m0.theta());
  CHECK(back1.link() == Link::Exp);
}

TEST_CASE("representer risk gradients match finite differences") {
  const auto data = testsup::random_observational(15, 2, 82);
  const BasisExpansion basis = BasisExpansion::polynomial(2, 1);
  for (int trial = 0; trial < 20; ++trial) {
    const Eigen::VectorXd t1 = testsup::random_vector(basis.dim(), 820 + trial);
    const Eigen::VectorXd t0 = testsup::random_vector(basis.dim(), 840 + trial);
    const RieszModel model(RatioModel(basis, Link::Identity, t1),
                           RatioModel(basis, Link::Identity, t0));
    Eigen::VectorXd stacked(t1.size() + t0.size());
    stacked << t1, t0;

    const auto risk = riesz_empirical_risk(model, data);
    const auto fd = testsup::fd_gradient(
        [&](const Eigen::VectorXd& th) {
          return riesz_empirical_risk(
                     model.with_thetas(th.head(t1.size()), th.tail(t0.size())), data, false)
              .value;
        },
        stacked);
    CHECK(testsup::rel_err(*risk.grad, fd) <= 1e-5);

    const auto paired = paired_lsif_risk(model.head1(), model.head0(), data);
    const auto fd_paired = testsup::fd_gradient(
        [&](const Eigen::VectorXd& th) {
          return paired_lsif_risk(model.head1().with_theta(th.head(t1.size())),
                                  model.head0().with_theta(th.tail(t0.size())), data, false)
              .value;
        },
        stacked);
    CHECK(testsup::rel_err(*paired.grad, fd_paired) <= 1e-5);
  }
}

TEST_CASE("constant heads solve the arm-share first-order conditions") {
  auto [data, oracle] = generate(SyntheticDesign::default_confounded(), 400, 83);
  const double p1 = static_cast<double>(data.arm_count(1)) / static_cast<double>(data.n());

  RieszFitConfig cfg;
  cfg.optimizer.max_iters = 400;
  cfg.optimizer.grad_tol = 1e-12;
  const auto fit = fit_riesz(data, constant_heads(0.0, 0.0, 2), cfg);
  const Eigen::VectorXd x = Eigen::VectorXd::Zero(2);
  const double r1_hat = fit.model.r1(x);
  const double r0_hat = fit.model.r0(x);
  // -2 + 2 p1 r1 = 0 and -2 + 2 (1 - p1) r0 = 0
  CHECK(std::abs(-2.0 + 2.0 * p1 * r1_hat) <= 1e-8);
  CHECK(std::abs(-2.0 + 2.0 * (1.0 - p1) * r0_hat) <= 1e-8);
  CHECK(r1_hat == doctest::Approx(1.0 / p1).epsilon(1e-7));
  CHECK(r0_hat == doctest::Approx(1.0 / (1.0 - p1)).epsilon(1e-7));
}

TEST_CASE("both quadratic objectives produce identical fit trajectories") {
  auto [data, oracle] = generate(SyntheticDesign::default_confounded(), 300, 84);
  const BasisExpansion basis = BasisExpansion::polynomial(2, 2);
  const RieszModel model0(RatioModel::zeros(basis, Link::Identity),
                          RatioModel::zeros(basis, Link::Identity));

  RieszFitConfig cfg;
  cfg.optimizer.max_iters = 60;
  const auto lsq = fit_riesz(data, model0, cfg);
  cfg.objective = RieszObjective::PairedLsif;
  const auto paired = fit_riesz(data, model0, cfg);

  CHECK(lsq.trace.objective == paired.trace.objective);
  CHECK(lsq.model.head1().theta() == paired.model.head1().theta());
  CHECK(lsq.model.head0().theta() == paired.model.head0().theta());
}

TEST_CASE("fitted representers beat the constant baseline on a logistic design") {
  SyntheticDesign design = SyntheticDesign::default_confounded();
  design.beta = Eigen::VectorXd::Constant(1, 1.0);
  design.gamma0 = Eigen::VectorXd::Constant(1, 1.0);
  design.gamma1 = Eigen::VectorXd::Zero(1);
  design.eps = 0.05;
  auto [data, oracle] = generate(design, 5000, 85);

  auto l2_error = [&](const RieszModel& model) {
    double err = 0.0;
    for (Eigen::Index i = 0; i < data.n(); ++i) {
      const Eigen::VectorXd x = data.x().row(i).transpose();
      const int d = static_cast<int>(data.d()(i));
      const double diff = model.alpha(d, x) - oracle.alpha(d, x);
      err += diff * diff;
    }
    return err / static_cast<double>(data.n());
  };

  // arm-share constants are the best constant heads
  const double p1 = static_cast<double>(data.arm_count(1)) / static_cast<double>(data.n());
  const double baseline = l2_error(constant_heads(1.0 / p1, 1.0 / (1.0 - p1)));

  RieszFitConfig cfg;
  cfg.optimizer.max_iters = 500;
  cfg.reg_lambda = 1e-6;
  const BasisExpansion basis = BasisExpansion::polynomial(1, 2);
  const RieszModel model0(RatioModel::zeros(basis, Link::Identity),
                          RatioModel::zeros(basis, Link::Identity));
  const auto fit = fit_riesz(data, model0, cfg);
  CHECK(l2_error(fit.model) < baseline);
}

TEST_CASE("tailored objective needs softplus-shift heads and keeps magnitudes above one") {
  auto [data, oracle] = generate(SyntheticDesign::default_confounded(), 300, 86);

  RieszFitConfig cfg;
  cfg.objective = RieszObjective::TailoredUkl;
  const BasisExpansion basis = BasisExpansion::polynomial(2, 1);
  CHECK_THROWS_AS(fit_riesz(data,
                            RieszModel(RatioModel::zeros(basis, Link::Identity),
                                       RatioModel::zeros(basis, Link::Identity)),
                            cfg),
                  UsageError);

  cfg.optimizer.max_iters = 200;
  const RieszModel model0(RatioModel::zeros(basis, Link::SoftplusShift),
                          RatioModel::zeros(basis, Link::SoftplusShift));
  const auto fit = fit_riesz(data, model0, cfg);
  for (Eigen::Index i = 0; i < data.n(); ++i) {
    const Eigen::VectorXd x = data.x().row(i).transpose();
    CHECK(fit.model.alpha(1, x) > 1.0);
    CHECK(fit.model.alpha(0, x) < -1.0);
  }
  // descent reached a better point than the start
  CHECK(fit.trace.objective.back() < fit.trace.objective.front());
}
