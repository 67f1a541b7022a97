#include "rieszdr/dre.hpp"

#include <algorithm>
#include <cstdio>
#include <cmath>
#include <numeric>
#include <random>

#include "rieszdr/kernel.hpp"

namespace rieszdr {

RiskValue lsif_empirical_risk(const RatioModel& r, const TwoSampleDataset& data, bool with_grad) {
  const Eigen::MatrixXd phi_de = r.basis().feature_matrix(data.de());
  const Eigen::MatrixXd phi_nu = r.basis().feature_matrix(data.nu());
  const Eigen::VectorXd z_de = phi_de * r.theta();
  const Eigen::VectorXd z_nu = phi_nu * r.theta();

  RiskValue out;
  Eigen::VectorXd grad = Eigen::VectorXd::Zero(r.theta().size());
  const double inv_de = 1.0 / static_cast<double>(data.n_de());
  const double inv_nu = 1.0 / static_cast<double>(data.n_nu());

  for (Eigen::Index j = 0; j < z_de.size(); ++j) {
    double t = link_value(r.link(), z_de(j));
    double dt = link_deriv(r.link(), z_de(j));
    if (r.truncated() && t < 0.0) {
      t = 0.0;
      dt = 0.0;
    }
    out.value += inv_de * t * t;
    if (with_grad) grad.noalias() += 2.0 * inv_de * t * dt * phi_de.row(j).transpose();
  }
  for (Eigen::Index k = 0; k < z_nu.size(); ++k) {
    double t = link_value(r.link(), z_nu(k));
    double dt = link_deriv(r.link(), z_nu(k));
    if (r.truncated() && t < 0.0) {
      t = 0.0;
      dt = 0.0;
    }
    out.value += -2.0 * inv_nu * t;
    if (with_grad) grad.noalias() += -2.0 * inv_nu * dt * phi_nu.row(k).transpose();
  }
  if (with_grad) out.grad = std::move(grad);
  return out;
}

double lsif_empirical_risk(const Eigen::VectorXd& r_de, const Eigen::VectorXd& r_nu) {
  return r_de.squaredNorm() / static_cast<double>(r_de.size()) -
         2.0 * r_nu.sum() / static_cast<double>(r_nu.size());
}

namespace {

// Shared piece sums for the clamped risks: the standalone numerator terms,
// the bracket, and their gradients.
struct ClampedPieces {
  double ell2_nu = 0.0;
  double ell1_nu = 0.0;
  double bracket = 0.0;  // mean_de ell1 - c mean_nu ell1
  Eigen::VectorXd g_outside;  // gradient of ell2_nu (+ add-back when requested)
  Eigen::VectorXd g_bracket;
};

ClampedPieces clamped_pieces(const BregmanLoss& loss, Link link, const Eigen::VectorXd& theta,
                             const Eigen::MatrixXd& phi_de, const Eigen::MatrixXd& phi_nu,
                             double c, double addback_weight, bool with_grad) {
  if (c < 0.0 || c >= 1.0) {
    throw UsageError("nonneg correction constant must lie in [0, 1), got " + std::to_string(c));
  }
  const Eigen::VectorXd z_de = phi_de * theta;
  const Eigen::VectorXd z_nu = phi_nu * theta;
  const double inv_de = 1.0 / static_cast<double>(phi_de.rows());
  const double inv_nu = 1.0 / static_cast<double>(phi_nu.rows());

  ClampedPieces out;
  double ell1_de = 0.0;
  if (with_grad) {
    out.g_outside = Eigen::VectorXd::Zero(theta.size());
    out.g_bracket = Eigen::VectorXd::Zero(theta.size());
  }

  for (Eigen::Index j = 0; j < z_de.size(); ++j) {
    const double t = link_value(link, z_de(j));
    if (!loss.in_domain(t)) {
      throw DomainError("loss '" + loss.token() + "': model value " + std::to_string(t) +
                        " at de sample " + std::to_string(j) + " is outside the domain");
    }
    ell1_de += inv_de * loss.ell1(t);
    if (with_grad) {
      out.g_bracket.noalias() +=
          inv_de * loss.ell1_deriv(t) * link_deriv(link, z_de(j)) * phi_de.row(j).transpose();
    }
  }
  for (Eigen::Index k = 0; k < z_nu.size(); ++k) {
    const double t = link_value(link, z_nu(k));
    if (!loss.in_domain(t)) {
      throw DomainError("loss '" + loss.token() + "': model value " + std::to_string(t) +
                        " at nu sample " + std::to_string(k) + " is outside the domain");
    }
    out.ell2_nu += inv_nu * loss.ell2(t);
    out.ell1_nu += inv_nu * loss.ell1(t);
    if (with_grad) {
      const double dt = link_deriv(link, z_nu(k));
      const double ell1p = loss.ell1_deriv(t);
      out.g_outside.noalias() += inv_nu * (loss.ell2_deriv(t) + addback_weight * c * ell1p) *
                                 dt * phi_nu.row(k).transpose();
      out.g_bracket.noalias() += -c * inv_nu * ell1p * dt * phi_nu.row(k).transpose();
    }
  }
  out.bracket = ell1_de - c * out.ell1_nu;
  return out;
}

}  // namespace

RiskValue nonneg_corrected_risk(const BregmanLoss& loss, Link link, const Eigen::VectorXd& theta,
                                const Eigen::MatrixXd& phi_de, const Eigen::MatrixXd& phi_nu,
                                double c, bool with_grad) {
  const ClampedPieces p =
      clamped_pieces(loss, link, theta, phi_de, phi_nu, c, /*addback_weight=*/0.0, with_grad);
  RiskValue out;
  out.value = p.ell2_nu + std::max(p.bracket, 0.0);
  if (with_grad) {
    out.grad = p.bracket > 0.0 ? Eigen::VectorXd(p.g_outside + p.g_bracket) : p.g_outside;
  }
  return out;
}

RiskValue nonneg_training_objective(const BregmanLoss& loss, Link link,
                                    const Eigen::VectorXd& theta, const Eigen::MatrixXd& phi_de,
                                    const Eigen::MatrixXd& phi_nu, double c, bool with_grad) {
  const ClampedPieces p =
      clamped_pieces(loss, link, theta, phi_de, phi_nu, c, /*addback_weight=*/1.0, with_grad);
  RiskValue out;
  out.value = p.ell2_nu + c * p.ell1_nu + std::max(p.bracket, 0.0);
  if (with_grad) {
    out.grad = p.bracket > 0.0 ? Eigen::VectorXd(p.g_outside + p.g_bracket) : p.g_outside;
  }
  return out;
}

RiskValue nonneg_corrected_risk(const RatioModel& r, const TwoSampleDataset& data,
                                const BregmanLoss& loss, double c, bool with_grad) {
  if (r.truncated()) throw UsageError("risk evaluation needs an untruncated model");
  return nonneg_corrected_risk(loss, r.link(), r.theta(), r.basis().feature_matrix(data.de()),
                               r.basis().feature_matrix(data.nu()), c, with_grad);
}

namespace {

// Gram matrix over the basis centers, used by the rkhs-norm penalty.
Eigen::MatrixXd rkhs_penalty_gram(const RatioModel& model) {
  if (model.basis().kind() != BasisExpansion::Kind::Gaussian || model.link() != Link::Identity) {
    throw UsageError("rkhs-norm regularization needs a gaussian basis with identity link");
  }
  return GaussianKernel(model.basis().bandwidth()).gram(model.basis().centers());
}

}  // namespace

DreFitResult fit_dre(const TwoSampleDataset& data, const RatioModel& model0,
                     const DreFitConfig& cfg) {
  if (model0.truncated()) {
    throw UsageError("fit_dre needs an untruncated starting model");
  }
  if (cfg.reg_lambda < 0.0) throw UsageError("reg_lambda must be >= 0");

  const Eigen::MatrixXd phi_de = model0.basis().feature_matrix(data.de());
  const Eigen::MatrixXd phi_nu = model0.basis().feature_matrix(data.nu());
  Eigen::MatrixXd gram;
  if (cfg.reg_kind == RegKind::RkhsNorm && cfg.reg_lambda > 0.0) {
    gram = rkhs_penalty_gram(model0);
  }

  const Link link = model0.link();
  Objective objective = [&](const Eigen::VectorXd& theta, Eigen::VectorXd* grad) -> double {
    RiskValue risk =
        cfg.nonneg_c ? nonneg_training_objective(cfg.loss, link, theta, phi_de, phi_nu,
                                                 *cfg.nonneg_c, grad != nullptr)
                     : bregman_risk(cfg.loss, link, theta, phi_de, phi_nu, grad != nullptr);
    double value = risk.value;
    if (cfg.reg_lambda > 0.0) {
      if (cfg.reg_kind == RegKind::L2Coefficients) {
        value += 0.5 * cfg.reg_lambda * theta.squaredNorm();
        if (grad) risk.grad->noalias() += cfg.reg_lambda * theta;
      } else {
        const Eigen::VectorXd c = theta.tail(theta.size() - 1);
        const Eigen::VectorXd kc = gram * c;
        value += 0.5 * cfg.reg_lambda * c.dot(kc);
        if (grad) risk.grad->tail(theta.size() - 1).noalias() += cfg.reg_lambda * kc;
      }
    }
    if (grad) *grad = std::move(*risk.grad);
    return value;
  };

  GdResult gd = minimize_gd(objective, model0.theta(), cfg.optimizer);

  DreFitResult out{model0.with_theta(gd.theta), std::move(gd.trace), false, {}};
  out.converged = out.trace.converged;
  if (!out.converged) {
    char gn[32];
    std::snprintf(gn, sizeof(gn), "%.3g", out.trace.final_grad_norm);
    out.warnings.push_back("optimizer stopped after " + std::to_string(out.trace.iterations) +
                           " iterations with gradient norm " + gn);
  }
  if (cfg.loss.kind() == LossKind::PuLogLoss) {
    const double max_ratio =
        std::max(out.model.values(data.de()).maxCoeff(), out.model.values(data.nu()).maxCoeff());
    if (max_ratio > 1.0 / cfg.loss.pu_constant()) {
      out.warnings.push_back("fitted ratio reaches " + std::to_string(max_ratio) +
                             " which exceeds 1/C; the pu constant C=" +
                             std::to_string(cfg.loss.pu_constant()) +
                             " may violate C < 1/sup(r0)");
    }
  }
  return out;
}

namespace {

// Rows for waymark k of m over a pair (n_nu, n_de); endpoints use the full
// sides so that the m = 1 telescope degenerates to the single-stage fit.
struct WaymarkRows {
  std::vector<Eigen::Index> nu_rows;
  std::vector<Eigen::Index> de_rows;
};

WaymarkRows waymark_rows(Eigen::Index n_nu, Eigen::Index n_de, int k, int m,
                         std::uint64_t seed) {
  WaymarkRows out;
  if (k == 0) {
    out.nu_rows.resize(static_cast<std::size_t>(n_nu));
    std::iota(out.nu_rows.begin(), out.nu_rows.end(), Eigen::Index{0});
    return out;
  }
  if (k == m) {
    out.de_rows.resize(static_cast<std::size_t>(n_de));
    std::iota(out.de_rows.begin(), out.de_rows.end(), Eigen::Index{0});
    return out;
  }
  const Eigen::Index n = std::min(n_nu, n_de);
  const double frac = static_cast<double>(k) / static_cast<double>(m);
  const auto take_nu = static_cast<Eigen::Index>(std::ceil((1.0 - frac) * static_cast<double>(n)));
  const auto take_de = static_cast<Eigen::Index>(std::floor(frac * static_cast<double>(n)));

  auto pick = [&](Eigen::Index total, Eigen::Index count, std::uint64_t tag) {
    std::vector<Eigen::Index> idx(static_cast<std::size_t>(total));
    std::iota(idx.begin(), idx.end(), Eigen::Index{0});
    std::mt19937_64 rng(mix_seed(seed, tag));
    std::shuffle(idx.begin(), idx.end(), rng);
    idx.resize(static_cast<std::size_t>(count));
    std::sort(idx.begin(), idx.end());  // keep dataset order within the draw
    return idx;
  };
  out.nu_rows = pick(n_nu, take_nu, 2 * static_cast<std::uint64_t>(k));
  out.de_rows = pick(n_de, take_de, 2 * static_cast<std::uint64_t>(k) + 1);
  return out;
}

Eigen::MatrixXd materialize(const TwoSampleDataset& data, const WaymarkRows& rows) {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(rows.nu_rows.size() + rows.de_rows.size()),
                      data.dim());
  Eigen::Index r = 0;
  for (Eigen::Index i : rows.nu_rows) out.row(r++) = data.nu().row(i);
  for (Eigen::Index i : rows.de_rows) out.row(r++) = data.de().row(i);
  return out;
}

}  // namespace

TelescopeFitResult fit_telescoped(const TwoSampleDataset& data, const RatioModel& model0,
                                  const TelescopeConfig& cfg) {
  if (cfg.waymarks < 1) throw UsageError("waymark count must be >= 1");
  const int m = cfg.waymarks;

  std::vector<Eigen::MatrixXd> waymarks;
  waymarks.reserve(static_cast<std::size_t>(m) + 1);
  for (int k = 0; k <= m; ++k) {
    WaymarkRows rows = waymark_rows(data.n_nu(), data.n_de(), k, m, cfg.seed);
    Eigen::MatrixXd w = materialize(data, rows);
    if (m >= 2 && w.rows() < 10) {
      throw InsufficientWaymarkSamples("waymark " + std::to_string(k) + " has only " +
                                       std::to_string(w.rows()) + " rows (need >= 10)");
    }
    waymarks.push_back(std::move(w));
  }

  std::vector<RatioModel> stages;
  std::vector<GdTrace> traces;
  std::vector<std::string> warnings;
  for (int k = 0; k < m; ++k) {
    // Stage k estimates p_k / p_{k+1}: numerator = waymark k.
    TwoSampleDataset stage_data(waymarks[static_cast<std::size_t>(k) + 1],
                                waymarks[static_cast<std::size_t>(k)]);
    DreFitResult fit = fit_dre(stage_data, model0, cfg.stage);
    for (auto& w : fit.warnings) warnings.push_back("stage " + std::to_string(k) + ": " + w);
    stages.push_back(std::move(fit.model));
    traces.push_back(std::move(fit.trace));
  }
  return TelescopeFitResult{TelescopedModel(std::move(stages)), std::move(traces),
                            std::move(warnings)};
}

RatioModel truncate_nonnegative(const RatioModel& r) { return r.with_truncation(); }

}  // namespace rieszdr
