#include "rieszdr/bregman.hpp"

#include <cmath>

#include "rieszdr/data.hpp"
#include "rieszdr/ratio_model.hpp"

namespace rieszdr {

BregmanLoss BregmanLoss::pu_log_loss(double c) {
  if (!(c > 0.0)) throw UsageError("pu loss constant C must be > 0, got " + std::to_string(c));
  return BregmanLoss(LossKind::PuLogLoss, c);
}

BregmanLoss BregmanLoss::parse(const std::string& token) {
  if (token == "lsif") return lsif();
  if (token == "ukl") return ukl();
  if (token == "bkl") return bkl();
  if (token == "riesz-ukl") return riesz_tailored_ukl();
  if (token.rfind("pu:", 0) == 0) {
    try {
      return pu_log_loss(std::stod(token.substr(3)));
    } catch (const std::invalid_argument&) {
      throw UsageError("cannot parse pu constant in '" + token + "'");
    }
  }
  throw UsageError("unknown loss '" + token + "' (expected lsif|ukl|bkl|pu:<C>|riesz-ukl)");
}

std::string BregmanLoss::token() const {
  switch (kind_) {
    case LossKind::Lsif: return "lsif";
    case LossKind::Ukl: return "ukl";
    case LossKind::Bkl: return "bkl";
    case LossKind::PuLogLoss: return "pu:" + std::to_string(pu_c_);
    case LossKind::RieszTailoredUkl: return "riesz-ukl";
  }
  return "lsif";
}

bool BregmanLoss::in_domain(double t) const {
  if (!std::isfinite(t)) return false;
  switch (kind_) {
    case LossKind::Lsif: return true;
    case LossKind::Ukl:
    case LossKind::Bkl: return t > 0.0;
    case LossKind::PuLogLoss: return t > 0.0 && t < 1.0;
    case LossKind::RieszTailoredUkl: return std::abs(t) > 1.0;
  }
  return false;
}

void BregmanLoss::require_domain(double t, const std::string& context) const {
  if (!in_domain(t)) {
    throw DomainError("loss '" + token() + "' is undefined at t=" + std::to_string(t) + " (" +
                      context + ")");
  }
}

double BregmanLoss::f(double t) const {
  require_domain(t, "f");
  switch (kind_) {
    case LossKind::Lsif: return 0.5 * (t - 1.0) * (t - 1.0);
    case LossKind::Ukl: return t * std::log(t) - t;
    case LossKind::Bkl: return t * std::log(t) - (1.0 + t) * std::log1p(t);
    case LossKind::PuLogLoss:
      return pu_c_ * std::log1p(-t) + pu_c_ * t * (std::log(t) - std::log1p(-t));
    case LossKind::RieszTailoredUkl: {
      const double a = std::abs(t);
      return (a - 1.0) * std::log(a - 1.0) + a;
    }
  }
  return 0.0;
}

double BregmanLoss::df(double t) const {
  require_domain(t, "df");
  switch (kind_) {
    case LossKind::Lsif: return t - 1.0;
    case LossKind::Ukl: return std::log(t);
    case LossKind::Bkl: return std::log(t) - std::log1p(t);
    case LossKind::PuLogLoss: return pu_c_ * (std::log(t) - std::log1p(-t));
    case LossKind::RieszTailoredUkl: {
      const double a = std::abs(t);
      const double branch = std::log(a - 1.0) + 2.0;
      return t > 0.0 ? branch : -branch;
    }
  }
  return 0.0;
}

double BregmanLoss::ell1(double t) const {
  require_domain(t, "ell1");
  switch (kind_) {
    case LossKind::Lsif: return 0.5 * (t * t - 1.0);
    case LossKind::Ukl: return t;
    case LossKind::Bkl: return std::log1p(t);
    case LossKind::PuLogLoss: return -pu_c_ * std::log1p(-t);
    case LossKind::RieszTailoredUkl: {
      const double a = std::abs(t);
      return std::log(a - 1.0) + a;
    }
  }
  return 0.0;
}

double BregmanLoss::ell2(double t) const { return -df(t); }

double BregmanLoss::ell1_deriv(double t) const {
  require_domain(t, "ell1_deriv");
  switch (kind_) {
    case LossKind::Lsif: return t;
    case LossKind::Ukl: return 1.0;
    case LossKind::Bkl: return 1.0 / (1.0 + t);
    case LossKind::PuLogLoss: return pu_c_ / (1.0 - t);
    case LossKind::RieszTailoredUkl: return t / (std::abs(t) - 1.0);
  }
  return 0.0;
}

double BregmanLoss::ell2_deriv(double t) const {
  require_domain(t, "ell2_deriv");
  switch (kind_) {
    case LossKind::Lsif: return -1.0;
    case LossKind::Ukl: return -1.0 / t;
    case LossKind::Bkl: return -1.0 / (t * (1.0 + t));
    case LossKind::PuLogLoss: return -pu_c_ / (t * (1.0 - t));
    case LossKind::RieszTailoredUkl: return -1.0 / (std::abs(t) - 1.0);
  }
  return 0.0;
}

RiskValue bregman_risk(const BregmanLoss& loss, Link link, const Eigen::VectorXd& theta,
                       const Eigen::MatrixXd& phi_de, const Eigen::MatrixXd& phi_nu,
                       bool with_grad) {
  if (loss.kind() == LossKind::RieszTailoredUkl) {
    throw UsageError("riesz-ukl is a representer loss; use riesz_tailored_ukl_risk");
  }

  const Eigen::VectorXd z_de = phi_de * theta;
  const Eigen::VectorXd z_nu = phi_nu * theta;

  RiskValue out;
  Eigen::VectorXd grad = Eigen::VectorXd::Zero(theta.size());
  const double inv_de = 1.0 / static_cast<double>(phi_de.rows());
  const double inv_nu = 1.0 / static_cast<double>(phi_nu.rows());

  for (Eigen::Index j = 0; j < z_de.size(); ++j) {
    const double t = link_value(link, z_de(j));
    if (!loss.in_domain(t)) {
      throw DomainError("loss '" + loss.token() + "': model value " + std::to_string(t) +
                        " at de sample " + std::to_string(j) + " is outside the domain");
    }
    out.value += inv_de * loss.ell1(t);
    if (with_grad) {
      grad.noalias() +=
          inv_de * loss.ell1_deriv(t) * link_deriv(link, z_de(j)) * phi_de.row(j).transpose();
    }
  }
  for (Eigen::Index k = 0; k < z_nu.size(); ++k) {
    const double t = link_value(link, z_nu(k));
    if (!loss.in_domain(t)) {
      throw DomainError("loss '" + loss.token() + "': model value " + std::to_string(t) +
                        " at nu sample " + std::to_string(k) + " is outside the domain");
    }
    out.value += inv_nu * loss.ell2(t);
    if (with_grad) {
      grad.noalias() +=
          inv_nu * loss.ell2_deriv(t) * link_deriv(link, z_nu(k)) * phi_nu.row(k).transpose();
    }
  }
  if (with_grad) out.grad = std::move(grad);
  return out;
}

RiskValue bregman_risk(const BregmanLoss& loss, const RatioModel& r,
                       const TwoSampleDataset& data, bool with_grad) {
  if (r.truncated()) {
    throw UsageError("risk evaluation needs an untruncated model");
  }
  return bregman_risk(loss, r.link(), r.theta(), r.basis().feature_matrix(data.de()),
                      r.basis().feature_matrix(data.nu()), with_grad);
}

RiskValue riesz_tailored_ukl_risk(const RieszModel& alpha, const ObservationalDataset& data,
                                  bool with_grad) {
  const RatioModel& h1 = alpha.head1();
  const RatioModel& h0 = alpha.head0();
  const Eigen::MatrixXd phi1 = h1.basis().feature_matrix(data.x());
  const Eigen::MatrixXd phi0 = h0.basis().feature_matrix(data.x());
  const Eigen::VectorXd z1 = phi1 * h1.theta();
  const Eigen::VectorXd z0 = phi0 * h0.theta();
  const Eigen::Index p1 = h1.theta().size();
  const Eigen::Index p0 = h0.theta().size();

  RiskValue out;
  Eigen::VectorXd grad = Eigen::VectorXd::Zero(p1 + p0);
  const double inv_n = 1.0 / static_cast<double>(data.n());

  for (Eigen::Index i = 0; i < data.n(); ++i) {
    const double r1 = link_value(h1.link(), z1(i));
    const double r0 = link_value(h0.link(), z0(i));
    const double a1 = r1;    // alpha(1, x)
    const double a0 = -r0;   // alpha(0, x)
    const int di = static_cast<int>(data.d()(i));
    const double adx = di == 1 ? a1 : a0;

    if (!(std::abs(adx) > 1.0) || !(a1 > 1.0) || !(a0 < -1.0)) {
      throw DomainError("representer magnitude must exceed 1, violated at row " +
                        std::to_string(i) + " (alpha(1,x)=" + std::to_string(a1) +
                        ", alpha(0,x)=" + std::to_string(a0) + ")");
    }

    out.value += inv_n * (std::log(std::abs(adx) - 1.0) + std::abs(adx) -
                          std::log(a1 - 1.0) - std::log(-a0 - 1.0));
    if (with_grad) {
      const double l1p = link_deriv(h1.link(), z1(i));
      const double l0p = link_deriv(h0.link(), z0(i));
      // d/da of log(|a|-1)+|a| is sign(a) * (1/(|a|-1) + 1).
      const double gown = (1.0 / (std::abs(adx) - 1.0) + 1.0) * (adx > 0.0 ? 1.0 : -1.0);
      double g1 = -1.0 / (a1 - 1.0);        // from -log(a1 - 1)
      double g0_on_a0 = 1.0 / (-a0 - 1.0);  // from -log(-a0 - 1), d/da0
      if (di == 1) {
        g1 += gown;  // a(D,X) = a1 on treated rows
      } else {
        g0_on_a0 += gown;
      }
      grad.head(p1).noalias() += inv_n * g1 * l1p * phi1.row(i).transpose();
      // a0 = -r0, so d a0 / d theta0 = -link'(z0) phi0.
      grad.tail(p0).noalias() += inv_n * g0_on_a0 * (-l0p) * phi0.row(i).transpose();
    }
  }
  if (with_grad) out.grad = std::move(grad);
  return out;
}

}  // namespace rieszdr
