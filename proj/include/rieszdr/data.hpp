#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "rieszdr/errors.hpp"

namespace rieszdr {

/**
 * n observations of (covariates x, binary treatment d, outcome y).
 *
 * The constructor validates: all entries finite, d exactly 0/1, n >= 2,
 * and both treatment arms non-empty. Instances are immutable afterwards
 * and safe to share across threads.
 */
class ObservationalDataset {
 public:
  ObservationalDataset(Eigen::MatrixXd x, Eigen::VectorXd d, Eigen::VectorXd y);

  const Eigen::MatrixXd& x() const { return x_; }
  const Eigen::VectorXd& d() const { return d_; }
  const Eigen::VectorXd& y() const { return y_; }
  Eigen::Index n() const { return x_.rows(); }
  Eigen::Index dim() const { return x_.cols(); }
  Eigen::Index arm_count(int arm) const;

  // Row subset (validated again, so the result keeps the type invariants).
  ObservationalDataset subset(const std::vector<Eigen::Index>& rows) const;

 private:
  Eigen::MatrixXd x_;
  Eigen::VectorXd d_;
  Eigen::VectorXd y_;
};

/**
 * Two independent covariate samples: `de` drawn from the denominator
 * density and `nu` from the numerator density of the target ratio
 * r0 = p_nu / p_de.
 */
class TwoSampleDataset {
 public:
  TwoSampleDataset(Eigen::MatrixXd de, Eigen::MatrixXd nu);

  const Eigen::MatrixXd& de() const { return de_; }
  const Eigen::MatrixXd& nu() const { return nu_; }
  Eigen::Index n_de() const { return de_.rows(); }
  Eigen::Index n_nu() const { return nu_.rows(); }
  Eigen::Index dim() const { return de_.cols(); }

 private:
  Eigen::MatrixXd de_;
  Eigen::MatrixXd nu_;
};

/// Partition of {0..n-1} into K folds, balanced to within one row.
struct FoldAssignment {
  std::vector<int> fold_id;  // size n, entries in [0, folds)
  int folds = 0;

  std::vector<Eigen::Index> fold_rows(int fold) const;
  std::vector<Eigen::Index> complement_rows(int fold) const;
};

/// Wraps the record-level checks: finite entries, binary d, both arms present.
ObservationalDataset validate_observational(const Eigen::MatrixXd& x,
                                            const Eigen::VectorXd& d,
                                            const Eigen::VectorXd& y);

/**
 * Builds the two-sample view behind the representer for one arm:
 * nu = all covariate rows (marginal), de = rows with d == arm (joint slice).
 * Note the de rows follow the conditional law given d == arm, so a ratio
 * fitted on this pair carries the arm-share factor Pr(D = arm).
 */
TwoSampleDataset split_two_sample_for_ate(const ObservationalDataset& data, int arm);

/// Seeded shuffle then round-robin; pure function of (n, folds, seed).
FoldAssignment make_folds(Eigen::Index n, int folds, std::uint64_t seed);

/// Deterministic stream mixing for derived seeds (splitmix64 over seed ^ tag).
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t tag);

}  // namespace rieszdr
