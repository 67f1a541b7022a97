#pragma once

#include <span>
#include <vector>

#include "rieszdr/data.hpp"
#include "rieszdr/kernel.hpp"
#include "rieszdr/ratio_model.hpp"

namespace rieszdr {

/**
 * Kernel least-squares ratio fit: minimizes over the RKHS of `kernel`
 *   (1/n_de) sum_i r(X_i^de)^2 - (2/n_nu) sum_j r(X_j^nu) + (lambda/2) |r|_H^2.
 *
 * By the representer theorem the minimizer is r(.) = sum_l c_l k(., z_l)
 * over the pooled points z = [de; nu]; c solves the stationarity system
 *   ((2/n_de) Kd' Kd + lambda K) c = (2/n_nu) Kn' 1,
 * symmetrized and solved with diagonal jitter 1e-10 tr(K)/m. The result is
 * returned as a gaussian-basis model with identity link (intercept pinned
 * at zero).
 */
RatioModel kulsif_fit(const TwoSampleDataset& data, const GaussianKernel& kernel, double lambda);

/**
 * Leave-one-out score by explicit refit: for i < min(n_de, n_nu), drop the
 * i-th de and i-th nu points together, refit, and average the held-out
 * least-squares objective (1/2) r(de_i)^2 - r(nu_i).
 */
double loocv_score(const TwoSampleDataset& data, const GaussianKernel& kernel, double lambda);

/// Grid search over loocv_score; optionally reports the per-lambda scores.
double select_lambda_loocv(const TwoSampleDataset& data, const GaussianKernel& kernel,
                           std::span<const double> grid, std::vector<double>* scores = nullptr);

}  // namespace rieszdr
