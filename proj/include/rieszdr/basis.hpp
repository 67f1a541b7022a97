#pragma once

#include <Eigen/Dense>
#include <string>

#include "vendor_json.hpp"

namespace rieszdr {

/**
 * Output transforms for linear-in-basis models. Exp keeps ratios positive
 * (ukl/bkl domains), Sigmoid keeps them in (0,1) (pu domain), SoftplusShift
 * maps to (1, inf) for representer heads that must stay above 1 in magnitude.
 */
enum class Link { Identity, Exp, Sigmoid, SoftplusShift };

double link_value(Link link, double z);
double link_deriv(Link link, double z);
Link parse_link(const std::string& token);
std::string link_token(Link link);

/**
 * Feature map x -> phi(x) with a leading intercept phi_0 = 1.
 *
 * polynomial(d, degree): per-coordinate powers [1, x_j, x_j^2, ...],
 *   dimension 1 + d * degree (degree 0 gives the intercept-only map).
 * gaussian(centers, bandwidth): [1, exp(-|x - c_l|^2 / (2 sigma^2))],
 *   dimension 1 + #centers.
 */
class BasisExpansion {
 public:
  enum class Kind { Polynomial, Gaussian };

  static BasisExpansion polynomial(Eigen::Index input_dim, int degree);
  static BasisExpansion gaussian(Eigen::MatrixXd centers, double bandwidth);

  Kind kind() const { return kind_; }
  Eigen::Index input_dim() const { return input_dim_; }
  Eigen::Index dim() const;
  int degree() const { return degree_; }
  const Eigen::MatrixXd& centers() const { return centers_; }
  double bandwidth() const { return bandwidth_; }

  Eigen::VectorXd features(const Eigen::VectorXd& x) const;
  /// Row i of the result holds phi(X.row(i)).
  Eigen::MatrixXd feature_matrix(const Eigen::MatrixXd& x) const;

  nlohmann::json to_json() const;
  static BasisExpansion from_json(const nlohmann::json& j);

  bool operator==(const BasisExpansion& other) const;

 private:
  BasisExpansion() = default;
  Kind kind_ = Kind::Polynomial;
  Eigen::Index input_dim_ = 0;
  int degree_ = 1;          // polynomial only
  Eigen::MatrixXd centers_; // gaussian only
  double bandwidth_ = 1.0;  // gaussian only
};

/**
 * Median heuristic bandwidth: median pairwise Euclidean distance over the
 * rows (an evenly strided subset caps the cost at ~512 rows, keeping the
 * value deterministic). Falls back to 1 when the median degenerates to 0.
 */
double median_pairwise_distance(const Eigen::MatrixXd& rows);

}  // namespace rieszdr
