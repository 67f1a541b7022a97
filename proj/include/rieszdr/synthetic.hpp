#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "rieszdr/data.hpp"
#include "rieszdr/vendor_json.hpp"

namespace rieszdr {

/**
 * Observational design with standard-normal covariates,
 *   e0(x) = clip(sigmoid(beta'x + intercept), eps, 1 - eps),
 *   mu0(d, x) = gamma0'x + d (tau_base + gamma1'x),
 *   Y = mu0(D, X) + noise_sd * N(0, 1).
 * The clip makes the overlap bound exact; with standard-normal covariates
 * the average effect equals tau_base.
 */
struct SyntheticDesign {
  Eigen::VectorXd beta;
  double intercept = 0.0;
  double eps = 0.05;
  Eigen::VectorXd gamma0;
  Eigen::VectorXd gamma1;
  double tau_base = 1.0;
  double noise_sd = 1.0;

  Eigen::Index dim() const { return beta.size(); }
  void validate() const;  // throws DegenerateDesign

  static SyntheticDesign default_confounded();
  static SyntheticDesign no_confounding();
  /// Token grammar: default-confounded | no-confounding
  static SyntheticDesign parse(const std::string& token);

  nlohmann::json to_json() const;
};

/// Closed-form truth for one observational design.
class SyntheticOracle {
 public:
  explicit SyntheticOracle(SyntheticDesign design) : design_(std::move(design)) {}

  const SyntheticDesign& design() const { return design_; }
  double e0(const Eigen::VectorXd& x) const;
  double r1(const Eigen::VectorXd& x) const { return 1.0 / e0(x); }
  double r0(const Eigen::VectorXd& x) const { return 1.0 / (1.0 - e0(x)); }
  double alpha(int d, const Eigen::VectorXd& x) const;
  double mu(int d, const Eigen::VectorXd& x) const;
  double tau0() const { return design_.tau_base; }

 private:
  SyntheticDesign design_;
};

/**
 * Draws n rows; deterministic given the seed. When a draw happens to miss a
 * treatment arm, the seed is incremented and the draw repeated, with a note
 * appended to *warnings.
 */
std::pair<ObservationalDataset, SyntheticOracle> generate(
    const SyntheticDesign& design, Eigen::Index n, std::uint64_t seed,
    std::vector<std::string>* warnings = nullptr);

/// Truth for the mean-shift pair de ~ N(0, I), nu ~ N(mu_shift, I).
class GaussianShiftOracle {
 public:
  explicit GaussianShiftOracle(Eigen::VectorXd mu_shift) : mu_shift_(std::move(mu_shift)) {}

  const Eigen::VectorXd& mu_shift() const { return mu_shift_; }
  /// r0(x) = exp(mu'x - |mu|^2 / 2)
  double ratio(const Eigen::VectorXd& x) const;
  /// KL(p_nu | p_de) = |mu|^2 / 2
  double kl_gap() const { return 0.5 * mu_shift_.squaredNorm(); }

 private:
  Eigen::VectorXd mu_shift_;
};

std::pair<TwoSampleDataset, GaussianShiftOracle> generate_two_sample(
    const Eigen::VectorXd& mu_shift, Eigen::Index n_de, Eigen::Index n_nu, std::uint64_t seed);

}  // namespace rieszdr
