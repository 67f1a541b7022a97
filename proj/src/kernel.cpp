#include "rieszdr/kernel.hpp"

#include <cmath>

namespace rieszdr {

GaussianKernel::GaussianKernel(double bandwidth) : bandwidth_(bandwidth) {
  if (!(bandwidth > 0.0)) {
    throw UsageError("kernel bandwidth must be > 0, got " + std::to_string(bandwidth));
  }
}

double GaussianKernel::operator()(const Eigen::VectorXd& a, const Eigen::VectorXd& b) const {
  return std::exp(-(a - b).squaredNorm() / (2.0 * bandwidth_ * bandwidth_));
}

Eigen::MatrixXd GaussianKernel::cross(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) const {
  // |a_i - b_j|^2 = |a_i|^2 + |b_j|^2 - 2 a_i . b_j
  Eigen::VectorXd a2 = a.rowwise().squaredNorm();
  Eigen::VectorXd b2 = b.rowwise().squaredNorm();
  Eigen::MatrixXd d2 = (-2.0 * a * b.transpose());
  d2.colwise() += a2;
  d2.rowwise() += b2.transpose();
  const double denom = 2.0 * bandwidth_ * bandwidth_;
  return (-d2.array().max(0.0) / denom).exp();
}

Eigen::MatrixXd GaussianKernel::gram(const Eigen::MatrixXd& a) const {
  Eigen::MatrixXd k = cross(a, a);
  // Exact symmetry and unit diagonal despite rounding in the distance algebra.
  k = 0.5 * (k + k.transpose()).eval();
  k.diagonal().setOnes();
  return k;
}

}  // namespace rieszdr
