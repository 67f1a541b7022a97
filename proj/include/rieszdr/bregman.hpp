#pragma once

#include <Eigen/Dense>
#include <optional>
#include <string>

#include "rieszdr/basis.hpp"
#include "rieszdr/errors.hpp"

namespace rieszdr {

class RatioModel;
class RieszModel;
class ObservationalDataset;
class TwoSampleDataset;

enum class LossKind { Lsif, Ukl, Bkl, PuLogLoss, RieszTailoredUkl };

/**
 * Convex generator f of a Bregman-divergence ratio-matching risk, together
 * with the two pointwise pieces it induces:
 *
 *   ell1(t) = f'(t) * t - f(t)   (averaged over the denominator sample)
 *   ell2(t) = -f'(t)             (averaged over the numerator sample)
 *
 * so that the empirical risk  mean_de[ell1(r)] + mean_nu[ell2(r)]  estimates
 * the population divergence up to a term constant in r. The catalog:
 *
 *   lsif       f(t) = (t-1)^2 / 2            t in R
 *   ukl        f(t) = t log t - t            t > 0
 *   bkl        f(t) = t log t - (1+t)log(1+t)  t > 0
 *   pu:<C>     f(t) = C log(1-t) + C t (log t - log(1-t))   0 < t < 1
 *   riesz-ukl  f(a) = (|a|-1) log(|a|-1) + |a|              |a| > 1
 *
 * The last row is the signed-representer variant; it enters through
 * riesz_tailored_ukl_risk rather than the two-sample risk below.
 */
class BregmanLoss {
 public:
  static BregmanLoss lsif() { return BregmanLoss(LossKind::Lsif, 0.0); }
  static BregmanLoss ukl() { return BregmanLoss(LossKind::Ukl, 0.0); }
  static BregmanLoss bkl() { return BregmanLoss(LossKind::Bkl, 0.0); }
  static BregmanLoss pu_log_loss(double c);
  static BregmanLoss riesz_tailored_ukl() { return BregmanLoss(LossKind::RieszTailoredUkl, 0.0); }

  // Token grammar: lsif | ukl | bkl | pu:<C> | riesz-ukl
  static BregmanLoss parse(const std::string& token);
  std::string token() const;

  LossKind kind() const { return kind_; }
  double pu_constant() const { return pu_c_; }

  bool in_domain(double t) const;
  /// Throws DomainError naming `context` when t is outside the domain.
  void require_domain(double t, const std::string& context) const;

  double f(double t) const;
  double df(double t) const;
  double ell1(double t) const;
  double ell2(double t) const;
  // d/dt of the pieces; both depend only on f'': ell1' = t f'', ell2' = -f''.
  double ell1_deriv(double t) const;
  double ell2_deriv(double t) const;

 private:
  BregmanLoss(LossKind kind, double pu_c) : kind_(kind), pu_c_(pu_c) {}
  LossKind kind_;
  double pu_c_;
};

struct RiskValue {
  double value = 0.0;
  std::optional<Eigen::VectorXd> grad;
};

/**
 * Empirical Bregman ratio-matching risk
 *   (1/n_de) sum_j ell1(r(X_j^de)) + (1/n_nu) sum_k ell2(r(X_k^nu))
 * with the parameter gradient assembled by the chain rule through the model.
 * For lsif this equals (1/2) mean_de[r^2] - mean_nu[r] plus the constant 1/2
 * contributed by the generator's affine part.
 */
RiskValue bregman_risk(const BregmanLoss& loss, const RatioModel& r,
                       const TwoSampleDataset& data, bool with_grad = true);

/// Same risk evaluated from precomputed feature matrices (fit hot path);
/// the model/data overload above delegates here.
RiskValue bregman_risk(const BregmanLoss& loss, Link link, const Eigen::VectorXd& theta,
                       const Eigen::MatrixXd& phi_de, const Eigen::MatrixXd& phi_nu,
                       bool with_grad = true);

/**
 * Signed-representer risk tailored to |alpha| > 1: the sample average of
 *   log(|a(D,X)|-1) + |a(D,X)| - log(a(1,X)-1) - log(-a(0,X)-1).
 * Requires a(1,x) > 1 and a(0,x) < -1 at every sample point. The gradient is
 * taken with respect to the stacked head parameters [theta1; theta0].
 */
RiskValue riesz_tailored_ukl_risk(const RieszModel& alpha, const ObservationalDataset& data,
                                  bool with_grad = true);

}  // namespace rieszdr
