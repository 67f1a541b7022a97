#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "rieszdr/bregman.hpp"
#include "rieszdr/data.hpp"
#include "rieszdr/optimizer.hpp"
#include "rieszdr/ratio_model.hpp"

namespace rieszdr {

enum class RieszObjective { LeastSquares, PairedLsif, TailoredUkl };

RieszObjective parse_riesz_objective(const std::string& token);
std::string riesz_objective_token(RieszObjective objective);

struct RieszFitConfig {
  RieszObjective objective = RieszObjective::LeastSquares;
  double reg_lambda = 0.0;
  GdSettings optimizer;
  std::uint64_t seed = 0;
};

struct RieszFitResult {
  RieszModel model;
  GdTrace trace;
  bool converged = false;
  std::vector<std::string> warnings;
};

/**
 * Least-squares representer risk
 *   (1/n) sum_i [ -2 (a(1, X_i) - a(0, X_i)) + a(D_i, X_i)^2 ],
 * the feasible rewrite of the squared error against the true representer.
 * The gradient is with respect to the stacked head parameters [theta1; theta0].
 */
RiskValue riesz_empirical_risk(const RieszModel& alpha, const ObservationalDataset& data,
                               bool with_grad = true);

/**
 * The same objective written as a pair of least-squares ratio problems over
 * the joint sample:
 *   (1/n) sum_i [ -2 (r1(X_i) + r0(X_i)) + D_i r1(X_i)^2 + (1-D_i) r0(X_i)^2 ].
 * Evaluates through the two ratio heads directly, keeping this an
 * independent route from riesz_empirical_risk; the two agree exactly for
 * alpha(d, x) = d r1(x) - (1-d) r0(x).
 */
RiskValue paired_lsif_risk(const RatioModel& r1, const RatioModel& r0,
                           const ObservationalDataset& data, bool with_grad = true);

/// alpha(d, x) = d r1(x) - (1-d) r0(x); the inverse recovers the heads.
RieszModel alpha_from_ratios(RatioModel r1, RatioModel r0);
std::pair<RatioModel, RatioModel> ratios_from_alpha(const RieszModel& alpha);

/**
 * Minimizes the selected representer objective plus
 * reg_lambda * (1/2)|theta|^2 with the deterministic backtracking optimizer.
 * The tailored-ukl objective requires softplus-shift head links so the
 * iterates stay inside |alpha| > 1 by construction.
 */
RieszFitResult fit_riesz(const ObservationalDataset& data, const RieszModel& model0,
                         const RieszFitConfig& cfg);

}  // namespace rieszdr
