#pragma once

#include <Eigen/Dense>
#include <vector>

#include "rieszdr/basis.hpp"

namespace rieszdr {

/**
 * Linear-in-basis ratio model r(x) = link(theta' phi(x)).
 *
 * When `truncated` is set, evaluation applies max(r, 0) pointwise; fitted
 * models carry the flag only after truncate_nonnegative.
 */
class RatioModel {
 public:
  RatioModel(BasisExpansion basis, Link link, Eigen::VectorXd theta, bool truncated = false);

  /// Zero-coefficient model over the given basis.
  static RatioModel zeros(BasisExpansion basis, Link link);

  const BasisExpansion& basis() const { return basis_; }
  Link link() const { return link_; }
  const Eigen::VectorXd& theta() const { return theta_; }
  bool truncated() const { return truncated_; }

  RatioModel with_theta(Eigen::VectorXd theta) const;
  RatioModel with_truncation() const;

  double value(const Eigen::VectorXd& x) const;
  Eigen::VectorXd values(const Eigen::MatrixXd& x) const;
  /// Evaluation from a precomputed feature row (optimizer hot path).
  double value_from_features(const Eigen::VectorXd& phi) const;

  nlohmann::json to_json() const;
  static RatioModel from_json(const nlohmann::json& j);

 private:
  BasisExpansion basis_;
  Link link_ = Link::Identity;
  Eigen::VectorXd theta_;
  bool truncated_ = false;
};

/**
 * Representer model with two ratio heads:
 *   alpha(d, x) = d * r1(x) - (1 - d) * r0(x).
 * Heads may share the basis (the default fit setup) or carry separate ones.
 */
class RieszModel {
 public:
  RieszModel(RatioModel head1, RatioModel head0);

  const RatioModel& head1() const { return head1_; }
  const RatioModel& head0() const { return head0_; }
  bool shared_basis() const { return head1_.basis() == head0_.basis(); }

  double r1(const Eigen::VectorXd& x) const { return head1_.value(x); }
  double r0(const Eigen::VectorXd& x) const { return head0_.value(x); }
  double alpha(int d, const Eigen::VectorXd& x) const;

  RieszModel with_thetas(Eigen::VectorXd theta1, Eigen::VectorXd theta0) const;

  nlohmann::json to_json() const;
  static RieszModel from_json(const nlohmann::json& j);

 private:
  RatioModel head1_;
  RatioModel head0_;
};

/// Product of per-stage ratio models, r(x) = prod_k r_k(x).
class TelescopedModel {
 public:
  explicit TelescopedModel(std::vector<RatioModel> stages);

  const std::vector<RatioModel>& stages() const { return stages_; }
  double value(const Eigen::VectorXd& x) const;
  Eigen::VectorXd values(const Eigen::MatrixXd& x) const;

  nlohmann::json to_json() const;
  static TelescopedModel from_json(const nlohmann::json& j);

 private:
  std::vector<RatioModel> stages_;
};

}  // namespace rieszdr
