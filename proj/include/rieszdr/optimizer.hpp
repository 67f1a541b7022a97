#pragma once

#include <Eigen/Dense>
#include <functional>
#include <vector>

namespace rieszdr {

struct GdSettings {
  int max_iters = 500;
  double step_size = 1.0;   // initial trial step, reset every iteration
  double grad_tol = 1e-8;
  double shrink = 0.5;      // backtracking factor
  double armijo_c = 1e-4;
  int max_backtracks = 60;
};

struct GdTrace {
  std::vector<double> objective;  // value at every accepted iterate, nonincreasing
  double final_grad_norm = 0.0;
  int iterations = 0;
  bool converged = false;  // grad norm reached grad_tol
};

struct GdResult {
  Eigen::VectorXd theta;
  GdTrace trace;
};

/// Objective callback; fills *grad when non-null. May throw DomainError at
/// points outside the loss domain.
using Objective = std::function<double(const Eigen::VectorXd&, Eigen::VectorXd* grad)>;

/**
 * Deterministic full-batch gradient descent with Armijo backtracking.
 *
 * Trial points that evaluate non-finite or outside the loss domain are
 * treated as failed backtracking steps; a DomainError at the initial point
 * propagates. When no acceptable step exists or max_iters is reached before
 * the gradient tolerance, the best iterate so far is returned with
 * trace.converged == false.
 */
GdResult minimize_gd(const Objective& objective, Eigen::VectorXd theta0,
                     const GdSettings& settings);

}  // namespace rieszdr
