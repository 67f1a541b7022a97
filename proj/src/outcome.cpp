#include "rieszdr/outcome.hpp"

namespace rieszdr {

OutcomeModel::OutcomeModel(BasisExpansion basis, Eigen::VectorXd beta)
    : basis_(std::move(basis)), beta_(std::move(beta)) {
  if (beta_.size() != 2 * basis_.dim()) {
    throw SchemaMismatch("outcome model needs 2 * dim(basis) coefficients");
  }
}

double OutcomeModel::mu(int d, const Eigen::VectorXd& x) const {
  const Eigen::VectorXd phi = basis_.features(x);
  const Eigen::Index p = basis_.dim();
  double v = phi.dot(beta_.head(p));
  if (d == 1) v += phi.dot(beta_.tail(p));
  return v;
}

OutcomeModel ridge_outcome_fit(const ObservationalDataset& data, const BasisExpansion& basis,
                               double lambda) {
  if (lambda < 0.0) throw UsageError("ridge lambda must be >= 0");
  const Eigen::MatrixXd phi = basis.feature_matrix(data.x());
  const Eigen::Index p = basis.dim();

  Eigen::MatrixXd design(data.n(), 2 * p);
  design.leftCols(p) = phi;
  design.rightCols(p) = phi.array().colwise() * data.d().array();

  Eigen::MatrixXd normal = design.transpose() * design;
  normal.diagonal().array() += lambda;
  Eigen::LDLT<Eigen::MatrixXd> ldlt(normal);
  if (ldlt.info() != Eigen::Success) {
    throw SingularSystem("outcome normal equations factorization failed");
  }
  const Eigen::VectorXd rhs = design.transpose() * data.y();
  Eigen::VectorXd beta = ldlt.solve(rhs);
  if (!beta.allFinite() ||
      (normal * beta - rhs).norm() > 1e-6 * std::max(1.0, rhs.norm())) {
    throw SingularSystem("outcome design is rank-deficient; increase lambda");
  }
  return OutcomeModel(basis, std::move(beta));
}

}  // namespace rieszdr
