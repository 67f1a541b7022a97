#pragma once

#include "rieszdr/basis.hpp"
#include "rieszdr/data.hpp"

namespace rieszdr {

/**
 * Ridge regression of the outcome on [phi(x), d * phi(x)], so each arm has
 * its own surface: mu(d, x) = phi(x)' beta_main + d * phi(x)' beta_inter.
 * (The plain treatment column is d * phi_0 and already lives in the
 * interaction block.)
 */
class OutcomeModel {
 public:
  OutcomeModel(BasisExpansion basis, Eigen::VectorXd beta);

  const BasisExpansion& basis() const { return basis_; }
  const Eigen::VectorXd& beta() const { return beta_; }

  double mu(int d, const Eigen::VectorXd& x) const;

 private:
  BasisExpansion basis_;
  Eigen::VectorXd beta_;  // [beta_main; beta_inter]
};

/// beta = (Psi' Psi + lambda I)^{-1} Psi' y; lambda = 0 is plain least squares.
OutcomeModel ridge_outcome_fit(const ObservationalDataset& data, const BasisExpansion& basis,
                               double lambda);

}  // namespace rieszdr
