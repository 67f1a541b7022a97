#include "rieszdr/ate.hpp"

#include <cmath>

namespace rieszdr {

std::string estimator_kind_token(EstimatorKind kind) {
  switch (kind) {
    case EstimatorKind::Debiased: return "debiased";
    case EstimatorKind::Plugin: return "plugin";
    case EstimatorKind::Ipw: return "ipw";
  }
  return "debiased";
}

nlohmann::json AteReport::to_json() const {
  nlohmann::json j;
  j["estimator"] = estimator_kind_token(kind);
  j["tau_hat"] = tau_hat;
  j["se"] = se;
  j["ci_low"] = ci_low;
  j["ci_high"] = ci_high;
  j["overlap_warning"] = overlap_warning;
  nlohmann::json folds = nlohmann::json::array();
  for (const auto& f : per_fold) {
    folds.push_back({{"fold", f.fold_id},
                     {"mean_alpha_residual", f.mean_alpha_residual},
                     {"mean_m_mu", f.mean_m_mu}});
  }
  j["per_fold"] = std::move(folds);
  return j;
}

double neyman_score(double y, int d, const Eigen::VectorXd& x, const NuisanceFns& nuisances,
                    double theta) {
  return nuisances.alpha(d, x) * (y - nuisances.mu(d, x)) + nuisances.mu(1, x) -
         nuisances.mu(0, x) - theta;
}

namespace {

ObservationalDataset training_complement(const ObservationalDataset& data,
                                         const FoldAssignment& folds, int fold) {
  const auto rows = folds.complement_rows(fold);
  Eigen::Index treated = 0;
  for (Eigen::Index i : rows) treated += (data.d()(i) == 1.0);
  if (treated == 0 || treated == static_cast<Eigen::Index>(rows.size())) {
    throw EmptyArmInFold("training complement of fold " + std::to_string(fold) +
                         " has a single treatment arm; use fewer folds or more data");
  }
  return data.subset(rows);
}

}  // namespace

AteReport estimate_ate_debiased(const ObservationalDataset& data, int folds,
                                const NuisanceFitter& fitter, std::uint64_t seed,
                                double eps_min) {
  const FoldAssignment assignment = make_folds(data.n(), folds, seed);
  const double ratio_cap = 1.0 / eps_min;

  Eigen::VectorXd contrib(data.n());
  AteReport report;
  report.kind = EstimatorKind::Debiased;

  for (int fold = 0; fold < folds; ++fold) {
    const NuisanceFns nuisances = fitter(training_complement(data, assignment, fold));
    FoldDiagnostics diag;
    diag.fold_id = fold;
    Eigen::Index fold_n = 0;
    for (Eigen::Index i : assignment.fold_rows(fold)) {
      const Eigen::VectorXd x = data.x().row(i).transpose();
      const int d = static_cast<int>(data.d()(i));
      const double mu_d = nuisances.mu(d, x);
      const double m_mu = nuisances.mu(1, x) - nuisances.mu(0, x);
      const double a = nuisances.alpha(d, x);
      const double resid_term = a * (data.y()(i) - mu_d);
      contrib(i) = resid_term + m_mu;
      diag.mean_alpha_residual += resid_term;
      diag.mean_m_mu += m_mu;
      ++fold_n;

      const double r1 = nuisances.alpha(1, x);
      const double r0 = -nuisances.alpha(0, x);
      if (r1 > ratio_cap || r0 > ratio_cap) report.overlap_warning = true;
    }
    diag.mean_alpha_residual /= static_cast<double>(fold_n);
    diag.mean_m_mu /= static_cast<double>(fold_n);
    report.per_fold.push_back(diag);
  }

  const double n = static_cast<double>(data.n());
  report.tau_hat = contrib.mean();
  const Eigen::VectorXd psi = contrib.array() - report.tau_hat;
  report.se = std::sqrt(psi.squaredNorm() / n) / std::sqrt(n);
  report.ci_low = report.tau_hat - 1.96 * report.se;
  report.ci_high = report.tau_hat + 1.96 * report.se;
  return report;
}

AteReport estimate_ate_plugin(const ObservationalDataset& data, int folds,
                              const OutcomeFitter& fitter, std::uint64_t seed) {
  const FoldAssignment assignment = make_folds(data.n(), folds, seed);

  Eigen::VectorXd contrib(data.n());
  AteReport report;
  report.kind = EstimatorKind::Plugin;

  for (int fold = 0; fold < folds; ++fold) {
    const auto mu = fitter(training_complement(data, assignment, fold));
    FoldDiagnostics diag;
    diag.fold_id = fold;
    Eigen::Index fold_n = 0;
    for (Eigen::Index i : assignment.fold_rows(fold)) {
      const Eigen::VectorXd x = data.x().row(i).transpose();
      contrib(i) = mu(1, x) - mu(0, x);
      diag.mean_m_mu += contrib(i);
      ++fold_n;
    }
    diag.mean_m_mu /= static_cast<double>(fold_n);
    report.per_fold.push_back(diag);
  }

  const double n = static_cast<double>(data.n());
  report.tau_hat = contrib.mean();
  const Eigen::VectorXd centered = contrib.array() - report.tau_hat;
  report.se = std::sqrt(centered.squaredNorm() / n) / std::sqrt(n);
  report.ci_low = report.tau_hat - 1.96 * report.se;
  report.ci_high = report.tau_hat + 1.96 * report.se;
  return report;
}

}  // namespace rieszdr
