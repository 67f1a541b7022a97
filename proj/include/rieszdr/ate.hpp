#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "rieszdr/data.hpp"
#include "rieszdr/vendor_json.hpp"

namespace rieszdr {

enum class EstimatorKind { Debiased, Plugin, Ipw };
std::string estimator_kind_token(EstimatorKind kind);

struct FoldDiagnostics {
  int fold_id = 0;
  double mean_alpha_residual = 0.0;  // mean of alpha(D,X) (Y - mu(D,X)) within the fold
  double mean_m_mu = 0.0;            // mean of mu(1,X) - mu(0,X) within the fold
};

struct AteReport {
  double tau_hat = 0.0;
  double se = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
  EstimatorKind kind = EstimatorKind::Debiased;
  std::vector<FoldDiagnostics> per_fold;
  bool overlap_warning = false;

  nlohmann::json to_json() const;
};

/// Out-of-fold nuisances evaluated at arbitrary (d, x).
struct NuisanceFns {
  std::function<double(int d, const Eigen::VectorXd& x)> mu;
  std::function<double(int d, const Eigen::VectorXd& x)> alpha;
};

/// Fits nuisances on a training split; the pipeline calls it once per fold.
using NuisanceFitter = std::function<NuisanceFns(const ObservationalDataset& train)>;
using OutcomeFitter =
    std::function<std::function<double(int, const Eigen::VectorXd&)>(const ObservationalDataset&)>;

/// Orthogonal score alpha(d,x)(y - mu(d,x)) + mu(1,x) - mu(0,x) - theta.
double neyman_score(double y, int d, const Eigen::VectorXd& x, const NuisanceFns& nuisances,
                    double theta);

/**
 * Cross-fitted estimator: nuisances fitted on each fold's complement and
 * evaluated in-fold; tau is the mean score contribution, the standard error
 * is sd(psi)/sqrt(n) with psi centered at tau, and the interval is the 95%
 * normal one. A training complement missing an arm raises EmptyArmInFold.
 * The report flags OverlapWarning when a fitted ratio head exceeds
 * 1/eps_min at an evaluation point.
 */
AteReport estimate_ate_debiased(const ObservationalDataset& data, int folds,
                                const NuisanceFitter& fitter, std::uint64_t seed,
                                double eps_min = 0.01);

/**
 * Plug-in baseline: tau = mean of mu(1,X) - mu(0,X) with cross-fitted mu.
 * Its se is the empirical sd of the plug-in integrand, a diagnostic only
 * (no valid asymptotic coverage is claimed).
 */
AteReport estimate_ate_plugin(const ObservationalDataset& data, int folds,
                              const OutcomeFitter& fitter, std::uint64_t seed);

}  // namespace rieszdr
