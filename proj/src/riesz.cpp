#include "rieszdr/riesz.hpp"

#include <cmath>
#include <cstdio>

namespace rieszdr {

RieszObjective parse_riesz_objective(const std::string& token) {
  if (token == "riesz-lsq") return RieszObjective::LeastSquares;
  if (token == "paired-lsif") return RieszObjective::PairedLsif;
  if (token == "riesz-ukl") return RieszObjective::TailoredUkl;
  throw UsageError("unknown representer objective '" + token +
                   "' (expected riesz-lsq|paired-lsif|riesz-ukl)");
}

std::string riesz_objective_token(RieszObjective objective) {
  switch (objective) {
    case RieszObjective::LeastSquares: return "riesz-lsq";
    case RieszObjective::PairedLsif: return "paired-lsif";
    case RieszObjective::TailoredUkl: return "riesz-ukl";
  }
  return "riesz-lsq";
}

namespace {

struct HeadFeatures {
  Eigen::MatrixXd phi1;
  Eigen::MatrixXd phi0;
};

HeadFeatures head_features(const RieszModel& model, const ObservationalDataset& data) {
  HeadFeatures f;
  f.phi1 = model.head1().basis().feature_matrix(data.x());
  f.phi0 = model.head1().basis() == model.head0().basis()
               ? f.phi1
               : model.head0().basis().feature_matrix(data.x());
  return f;
}

RiskValue riesz_empirical_risk_features(const RieszModel& model, const ObservationalDataset& data,
                                        const HeadFeatures& f, const Eigen::VectorXd& theta1,
                                        const Eigen::VectorXd& theta0, bool with_grad) {
  const Link link1 = model.head1().link();
  const Link link0 = model.head0().link();
  const Eigen::VectorXd z1 = f.phi1 * theta1;
  const Eigen::VectorXd z0 = f.phi0 * theta0;
  const Eigen::Index p1 = theta1.size();
  const Eigen::Index p0 = theta0.size();
  const double inv_n = 1.0 / static_cast<double>(data.n());

  RiskValue out;
  Eigen::VectorXd grad = Eigen::VectorXd::Zero(p1 + p0);
  for (Eigen::Index i = 0; i < data.n(); ++i) {
    const double di = data.d()(i);
    const double a1 = link_value(link1, z1(i));             // alpha(1, x)
    const double a0 = -link_value(link0, z0(i));            // alpha(0, x)
    const double adx = di * a1 + (1.0 - di) * a0;           // alpha(D, x)
    out.value += inv_n * (-2.0 * (a1 - a0) + adx * adx);
    if (with_grad) {
      const double l1p = link_deriv(link1, z1(i));
      const double l0p = link_deriv(link0, z0(i));
      // Chain rule through alpha: d alpha(1,x)/d theta1 = l1p phi1,
      // d alpha(0,x)/d theta0 = -l0p phi0, d alpha(D,x) picks up D / -(1-D).
      grad.head(p1).noalias() +=
          inv_n * (-2.0 + 2.0 * adx * di) * l1p * f.phi1.row(i).transpose();
      grad.tail(p0).noalias() +=
          inv_n * (-2.0 - 2.0 * adx * (1.0 - di)) * l0p * f.phi0.row(i).transpose();
    }
  }
  if (with_grad) out.grad = std::move(grad);
  return out;
}

RiskValue paired_lsif_risk_features(Link link1, Link link0, const ObservationalDataset& data,
                                    const HeadFeatures& f, const Eigen::VectorXd& theta1,
                                    const Eigen::VectorXd& theta0, bool with_grad) {
  const Eigen::VectorXd z1 = f.phi1 * theta1;
  const Eigen::VectorXd z0 = f.phi0 * theta0;
  const Eigen::Index p1 = theta1.size();
  const Eigen::Index p0 = theta0.size();
  const double inv_n = 1.0 / static_cast<double>(data.n());

  RiskValue out;
  Eigen::VectorXd grad = Eigen::VectorXd::Zero(p1 + p0);
  for (Eigen::Index i = 0; i < data.n(); ++i) {
    const double di = data.d()(i);
    const double r1 = link_value(link1, z1(i));
    const double r0 = link_value(link0, z0(i));
    out.value += inv_n * (-2.0 * (r1 + r0) + di * r1 * r1 + (1.0 - di) * r0 * r0);
    if (with_grad) {
      const double l1p = link_deriv(link1, z1(i));
      const double l0p = link_deriv(link0, z0(i));
      grad.head(p1).noalias() += inv_n * (-2.0 + 2.0 * di * r1) * l1p * f.phi1.row(i).transpose();
      grad.tail(p0).noalias() +=
          inv_n * (-2.0 + 2.0 * (1.0 - di) * r0) * l0p * f.phi0.row(i).transpose();
    }
  }
  if (with_grad) out.grad = std::move(grad);
  return out;
}

}  // namespace

RiskValue riesz_empirical_risk(const RieszModel& alpha, const ObservationalDataset& data,
                               bool with_grad) {
  return riesz_empirical_risk_features(alpha, data, head_features(alpha, data),
                                       alpha.head1().theta(), alpha.head0().theta(), with_grad);
}

RiskValue paired_lsif_risk(const RatioModel& r1, const RatioModel& r0,
                           const ObservationalDataset& data, bool with_grad) {
  RieszModel tmp(r1, r0);
  return paired_lsif_risk_features(r1.link(), r0.link(), data, head_features(tmp, data),
                                   r1.theta(), r0.theta(), with_grad);
}

RieszModel alpha_from_ratios(RatioModel r1, RatioModel r0) {
  return RieszModel(std::move(r1), std::move(r0));
}

std::pair<RatioModel, RatioModel> ratios_from_alpha(const RieszModel& alpha) {
  return {alpha.head1(), alpha.head0()};
}

RieszFitResult fit_riesz(const ObservationalDataset& data, const RieszModel& model0,
                         const RieszFitConfig& cfg) {
  if (cfg.reg_lambda < 0.0) throw UsageError("reg_lambda must be >= 0");
  if (cfg.objective == RieszObjective::TailoredUkl &&
      (model0.head1().link() != Link::SoftplusShift ||
       model0.head0().link() != Link::SoftplusShift)) {
    throw UsageError("the riesz-ukl objective needs softplus-shift head links so that "
                     "alpha(1,.) > 1 and alpha(0,.) < -1 hold by construction");
  }

  const HeadFeatures f = head_features(model0, data);
  const Eigen::Index p1 = model0.head1().theta().size();
  const Eigen::Index p0 = model0.head0().theta().size();

  Objective objective = [&](const Eigen::VectorXd& theta, Eigen::VectorXd* grad) -> double {
    const Eigen::VectorXd theta1 = theta.head(p1);
    const Eigen::VectorXd theta0 = theta.tail(p0);
    RiskValue risk;
    switch (cfg.objective) {
      case RieszObjective::LeastSquares:
        risk = riesz_empirical_risk_features(model0, data, f, theta1, theta0, grad != nullptr);
        break;
      case RieszObjective::PairedLsif:
        risk = paired_lsif_risk_features(model0.head1().link(), model0.head0().link(), data, f,
                                         theta1, theta0, grad != nullptr);
        break;
      case RieszObjective::TailoredUkl:
        risk = riesz_tailored_ukl_risk(model0.with_thetas(theta1, theta0), data, grad != nullptr);
        break;
    }
    double value = risk.value;
    if (cfg.reg_lambda > 0.0) {
      value += 0.5 * cfg.reg_lambda * theta.squaredNorm();
      if (grad) risk.grad->noalias() += cfg.reg_lambda * theta;
    }
    if (grad) *grad = std::move(*risk.grad);
    return value;
  };

  Eigen::VectorXd theta0(p1 + p0);
  theta0 << model0.head1().theta(), model0.head0().theta();
  GdResult gd = minimize_gd(objective, std::move(theta0), cfg.optimizer);

  RieszFitResult out{model0.with_thetas(gd.theta.head(p1), gd.theta.tail(p0)),
                     std::move(gd.trace), false, {}};
  out.converged = out.trace.converged;
  if (!out.converged) {
    char gn[32];
    std::snprintf(gn, sizeof(gn), "%.3g", out.trace.final_grad_norm);
    out.warnings.push_back("optimizer stopped after " + std::to_string(out.trace.iterations) +
                           " iterations with gradient norm " + gn);
  }
  return out;
}

}  // namespace rieszdr
