#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "rieszdr/bregman.hpp"
#include "rieszdr/data.hpp"
#include "rieszdr/optimizer.hpp"
#include "rieszdr/ratio_model.hpp"

namespace rieszdr {

enum class RegKind { L2Coefficients, RkhsNorm };

struct DreFitConfig {
  BregmanLoss loss = BregmanLoss::lsif();
  double reg_lambda = 0.0;
  RegKind reg_kind = RegKind::L2Coefficients;
  GdSettings optimizer;
  // Nonnegative-correction constant; when set the clamped objective below
  // replaces the plain empirical risk.
  std::optional<double> nonneg_c;
  std::uint64_t seed = 0;
};

struct DreFitResult {
  RatioModel model;
  GdTrace trace;
  bool converged = false;
  std::vector<std::string> warnings;
};

/**
 * Least-squares ratio-matching risk
 *   -(2/n_nu) sum_k r(X_k^nu) + (1/n_de) sum_j r(X_j^de)^2
 * (the feasible rewrite of the squared error against the true ratio; twice
 * the lsif Bregman risk up to a constant). Defined for any real-valued r.
 */
RiskValue lsif_empirical_risk(const RatioModel& r, const TwoSampleDataset& data,
                              bool with_grad = true);
/// Value-only form from precomputed model outputs (serves composite models).
double lsif_empirical_risk(const Eigen::VectorXd& r_de, const Eigen::VectorXd& r_nu);

/**
 * Clamped empirical risk with nonnegative correction:
 *   mean_nu[ell2(r)] + max(0, mean_de[ell1(r)] - C * mean_nu[ell1(r)]).
 * The gradient uses the one-sided max(0, .) convention: a clamped bracket
 * contributes nothing. Requires 0 <= C < 1.
 */
RiskValue nonneg_corrected_risk(const RatioModel& r, const TwoSampleDataset& data,
                                const BregmanLoss& loss, double c, bool with_grad = true);
RiskValue nonneg_corrected_risk(const BregmanLoss& loss, Link link, const Eigen::VectorXd& theta,
                                const Eigen::MatrixXd& phi_de, const Eigen::MatrixXd& phi_nu,
                                double c, bool with_grad = true);

/**
 * Training form of the clamped risk,
 *   mean_nu[ell2(r)] + C * mean_nu[ell1(r)]
 *     + max(0, mean_de[ell1(r)] - C * mean_nu[ell1(r)]),
 * which keeps the unclamped add-back term so the objective stays bounded
 * below in the directions that inflate r at numerator points (for the
 * least-squares loss the stationary scale is r = 1/C). Equal to
 * nonneg_corrected_risk plus C * mean_nu[ell1(r)]; fit_dre minimizes this
 * form when nonneg_c is set.
 */
RiskValue nonneg_training_objective(const BregmanLoss& loss, Link link,
                                    const Eigen::VectorXd& theta, const Eigen::MatrixXd& phi_de,
                                    const Eigen::MatrixXd& phi_nu, double c,
                                    bool with_grad = true);

/**
 * Gradient descent on the empirical Bregman risk (or its nonnegative
 * correction) plus reg_lambda * Omega(theta), starting from model0.
 * Omega is (1/2)|theta|^2 for l2 coefficients, or (1/2) c' K c over the
 * kernel coefficients for the rkhs norm (gaussian basis, identity link,
 * intercept excluded). Non-convergence is reported, not thrown.
 */
DreFitResult fit_dre(const TwoSampleDataset& data, const RatioModel& model0,
                     const DreFitConfig& cfg);

struct TelescopeConfig {
  int waymarks = 1;  // m
  DreFitConfig stage;
  std::uint64_t seed = 0;
};

struct TelescopeFitResult {
  TelescopedModel model;
  std::vector<GdTrace> traces;
  std::vector<std::string> warnings;
};

/**
 * Telescoped fit across waymark datasets bridging nu and de. Waymark 0 is
 * the full nu sample and waymark m the full de sample (so m = 1 reproduces
 * fit_dre exactly); intermediate waymark k pools ceil((1-k/m) n) seeded nu
 * draws with floor((k/m) n) de draws, n = min(n_nu, n_de), kept in dataset
 * order. Stage k fits r_k between waymarks k (numerator) and k+1
 * (denominator); the returned model is the product of the stages.
 */
TelescopeFitResult fit_telescoped(const TwoSampleDataset& data, const RatioModel& model0,
                                  const TelescopeConfig& cfg);

/// Pointwise max(r, 0) applied at evaluation time.
RatioModel truncate_nonnegative(const RatioModel& r);

}  // namespace rieszdr
