#pragma once

#include <Eigen/Dense>

#include "rieszdr/errors.hpp"

namespace rieszdr {

/// Gaussian kernel k(x, x') = exp(-|x - x'|^2 / (2 sigma^2)).
class GaussianKernel {
 public:
  explicit GaussianKernel(double bandwidth);

  double bandwidth() const { return bandwidth_; }
  double operator()(const Eigen::VectorXd& a, const Eigen::VectorXd& b) const;

  /// Gram matrix over the rows of `a` (symmetric positive semidefinite).
  Eigen::MatrixXd gram(const Eigen::MatrixXd& a) const;
  /// Cross-kernel matrix, entry (i, j) = k(a_i, b_j).
  Eigen::MatrixXd cross(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) const;

 private:
  double bandwidth_;
};

}  // namespace rieszdr
