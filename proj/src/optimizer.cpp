#include "rieszdr/optimizer.hpp"

#include <cmath>

#include "rieszdr/errors.hpp"

namespace rieszdr {

GdResult minimize_gd(const Objective& objective, Eigen::VectorXd theta0,
                     const GdSettings& settings) {
  GdResult res;
  res.theta = std::move(theta0);

  Eigen::VectorXd grad(res.theta.size());
  double value = 0.0;
  try {
    value = objective(res.theta, &grad);
  } catch (const DomainError& e) {
    throw DomainError(std::string("at the starting iterate: ") + e.what());
  }
  if (!std::isfinite(value)) {
    throw NumericError("objective is non-finite at the initial point");
  }
  res.trace.objective.push_back(value);
  res.trace.final_grad_norm = grad.norm();

  for (int iter = 0; iter < settings.max_iters; ++iter) {
    const double gnorm2 = grad.squaredNorm();
    res.trace.final_grad_norm = std::sqrt(gnorm2);
    if (res.trace.final_grad_norm <= settings.grad_tol) {
      res.trace.converged = true;
      break;
    }

    double step = settings.step_size;
    bool accepted = false;
    Eigen::VectorXd trial(res.theta.size());
    double trial_value = 0.0;
    for (int bt = 0; bt < settings.max_backtracks; ++bt) {
      trial = res.theta - step * grad;
      bool feasible = true;
      try {
        trial_value = objective(trial, nullptr);
      } catch (const DomainError&) {
        feasible = false;
      }
      if (feasible && std::isfinite(trial_value) &&
          trial_value <= value - settings.armijo_c * step * gnorm2) {
        accepted = true;
        break;
      }
      step *= settings.shrink;
    }
    if (!accepted) break;  // stalled; report the best iterate found

    res.theta = trial;
    value = objective(res.theta, &grad);
    res.trace.objective.push_back(value);
    res.trace.iterations = iter + 1;
  }

  res.trace.final_grad_norm = grad.norm();
  if (!res.trace.converged) {
    res.trace.converged = res.trace.final_grad_norm <= settings.grad_tol;
  }
  return res;
}

}  // namespace rieszdr
