#include "rieszdr/data.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

namespace rieszdr {

namespace {

void check_finite_matrix(const Eigen::MatrixXd& m, const char* what) {
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      if (!std::isfinite(m(i, j))) {
        throw NonFiniteValue(std::string(what) + " has a non-finite entry at row " +
                             std::to_string(i) + ", column " + std::to_string(j));
      }
    }
  }
}

}  // namespace

ObservationalDataset::ObservationalDataset(Eigen::MatrixXd x, Eigen::VectorXd d,
                                           Eigen::VectorXd y)
    : x_(std::move(x)), d_(std::move(d)), y_(std::move(y)) {
  const Eigen::Index n = x_.rows();
  if (d_.size() != n || y_.size() != n) {
    throw SchemaMismatch("covariates, treatment and outcome must have matching row counts");
  }
  if (n < 2) {
    throw DataError("need at least 2 observations, got " + std::to_string(n));
  }
  check_finite_matrix(x_, "covariate matrix");
  Eigen::Index n_treated = 0;
  for (Eigen::Index i = 0; i < n; ++i) {
    if (!std::isfinite(y_(i))) {
      throw NonFiniteValue("outcome is non-finite at row " + std::to_string(i));
    }
    const double di = d_(i);
    if (di != 0.0 && di != 1.0) {
      throw NonBinaryTreatment("treatment must be 0 or 1, row " + std::to_string(i) +
                               " has " + std::to_string(di));
    }
    n_treated += (di == 1.0);
  }
  if (n_treated == 0) throw EmptyArm("no treated observations (d == 1)");
  if (n_treated == n) throw EmptyArm("no control observations (d == 0)");
}

Eigen::Index ObservationalDataset::arm_count(int arm) const {
  Eigen::Index c = 0;
  for (Eigen::Index i = 0; i < n(); ++i) c += (d_(i) == static_cast<double>(arm));
  return c;
}

ObservationalDataset ObservationalDataset::subset(const std::vector<Eigen::Index>& rows) const {
  Eigen::MatrixXd xs(static_cast<Eigen::Index>(rows.size()), dim());
  Eigen::VectorXd ds(static_cast<Eigen::Index>(rows.size()));
  Eigen::VectorXd ys(static_cast<Eigen::Index>(rows.size()));
  for (std::size_t k = 0; k < rows.size(); ++k) {
    xs.row(static_cast<Eigen::Index>(k)) = x_.row(rows[k]);
    ds(static_cast<Eigen::Index>(k)) = d_(rows[k]);
    ys(static_cast<Eigen::Index>(k)) = y_(rows[k]);
  }
  return ObservationalDataset(std::move(xs), std::move(ds), std::move(ys));
}

TwoSampleDataset::TwoSampleDataset(Eigen::MatrixXd de, Eigen::MatrixXd nu)
    : de_(std::move(de)), nu_(std::move(nu)) {
  if (de_.rows() < 1 || nu_.rows() < 1) {
    throw DataError("both samples must be non-empty");
  }
  if (de_.cols() != nu_.cols()) {
    throw SchemaMismatch("de and nu samples must share the covariate dimension, got " +
                         std::to_string(de_.cols()) + " vs " + std::to_string(nu_.cols()));
  }
  check_finite_matrix(de_, "de sample");
  check_finite_matrix(nu_, "nu sample");
}

std::vector<Eigen::Index> FoldAssignment::fold_rows(int fold) const {
  std::vector<Eigen::Index> rows;
  for (std::size_t i = 0; i < fold_id.size(); ++i) {
    if (fold_id[i] == fold) rows.push_back(static_cast<Eigen::Index>(i));
  }
  return rows;
}

std::vector<Eigen::Index> FoldAssignment::complement_rows(int fold) const {
  std::vector<Eigen::Index> rows;
  for (std::size_t i = 0; i < fold_id.size(); ++i) {
    if (fold_id[i] != fold) rows.push_back(static_cast<Eigen::Index>(i));
  }
  return rows;
}

ObservationalDataset validate_observational(const Eigen::MatrixXd& x,
                                            const Eigen::VectorXd& d,
                                            const Eigen::VectorXd& y) {
  return ObservationalDataset(x, d, y);
}

TwoSampleDataset split_two_sample_for_ate(const ObservationalDataset& data, int arm) {
  if (arm != 0 && arm != 1) throw UsageError("arm must be 0 or 1");
  const Eigen::Index n_arm = data.arm_count(arm);
  if (n_arm == 0) throw EmptyArm("no observations with d == " + std::to_string(arm));
  Eigen::MatrixXd de(n_arm, data.dim());
  Eigen::Index k = 0;
  for (Eigen::Index i = 0; i < data.n(); ++i) {
    if (data.d()(i) == static_cast<double>(arm)) de.row(k++) = data.x().row(i);
  }
  return TwoSampleDataset(std::move(de), data.x());
}

FoldAssignment make_folds(Eigen::Index n, int folds, std::uint64_t seed) {
  if (folds < 2 || static_cast<Eigen::Index>(folds) > n) {
    throw BadFoldCount("fold count must satisfy 2 <= K <= n, got K=" + std::to_string(folds) +
                       ", n=" + std::to_string(n));
  }
  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::mt19937_64 rng(seed);
  std::shuffle(order.begin(), order.end(), rng);

  FoldAssignment out;
  out.folds = folds;
  out.fold_id.assign(static_cast<std::size_t>(n), 0);
  for (std::size_t pos = 0; pos < order.size(); ++pos) {
    out.fold_id[static_cast<std::size_t>(order[pos])] = static_cast<int>(pos % folds);
  }
  return out;
}

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t tag) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (tag + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace rieszdr
