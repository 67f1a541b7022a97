#include "rieszdr/kulsif.hpp"

#include <cmath>

namespace rieszdr {

namespace {

Eigen::VectorXd solve_stationarity(const Eigen::MatrixXd& gram, Eigen::Index n_de,
                                   Eigen::Index n_nu, double lambda) {
  const Eigen::Index m = gram.rows();
  const auto kd = gram.topRows(n_de);
  const auto kn = gram.bottomRows(n_nu);

  Eigen::MatrixXd a = (2.0 / static_cast<double>(n_de)) * kd.transpose() * kd + lambda * gram;
  a = 0.5 * (a + a.transpose()).eval();
  a.diagonal().array() += 1e-10 * gram.trace() / static_cast<double>(m);
  const Eigen::VectorXd b =
      (2.0 / static_cast<double>(n_nu)) * kn.transpose() * Eigen::VectorXd::Ones(n_nu);

  Eigen::LDLT<Eigen::MatrixXd> ldlt(a);
  if (ldlt.info() != Eigen::Success) {
    throw SingularSystem("stationarity system factorization failed");
  }
  Eigen::VectorXd c = ldlt.solve(b);
  if (!c.allFinite() || (a * c - b).norm() > 1e-6 * std::max(1.0, b.norm())) {
    throw SingularSystem("stationarity system solve failed even with jitter");
  }
  return c;
}

}  // namespace

RatioModel kulsif_fit(const TwoSampleDataset& data, const GaussianKernel& kernel, double lambda) {
  if (!(lambda > 0.0)) {
    throw NonPositiveLambda("kernel fit needs lambda > 0, got " + std::to_string(lambda));
  }
  Eigen::MatrixXd pooled(data.n_de() + data.n_nu(), data.dim());
  pooled << data.de(), data.nu();
  const Eigen::MatrixXd gram = kernel.gram(pooled);
  const Eigen::VectorXd c = solve_stationarity(gram, data.n_de(), data.n_nu(), lambda);

  Eigen::VectorXd theta(c.size() + 1);
  theta(0) = 0.0;  // kernel expansion has no intercept
  theta.tail(c.size()) = c;
  return RatioModel(BasisExpansion::gaussian(std::move(pooled), kernel.bandwidth()),
                    Link::Identity, std::move(theta));
}

double loocv_score(const TwoSampleDataset& data, const GaussianKernel& kernel, double lambda) {
  if (!(lambda > 0.0)) {
    throw NonPositiveLambda("loocv needs lambda > 0, got " + std::to_string(lambda));
  }
  if (data.n_de() < 2 || data.n_nu() < 2) {
    throw TooFewSamples("loocv needs at least 2 points on each side, got n_de=" +
                        std::to_string(data.n_de()) + ", n_nu=" + std::to_string(data.n_nu()));
  }
  const Eigen::Index n_pairs = std::min(data.n_de(), data.n_nu());

  double score = 0.0;
  for (Eigen::Index i = 0; i < n_pairs; ++i) {
    Eigen::MatrixXd de(data.n_de() - 1, data.dim());
    Eigen::MatrixXd nu(data.n_nu() - 1, data.dim());
    Eigen::Index r = 0;
    for (Eigen::Index j = 0; j < data.n_de(); ++j) {
      if (j != i) de.row(r++) = data.de().row(j);
    }
    r = 0;
    for (Eigen::Index j = 0; j < data.n_nu(); ++j) {
      if (j != i) nu.row(r++) = data.nu().row(j);
    }
    const RatioModel fit =
        kulsif_fit(TwoSampleDataset(std::move(de), std::move(nu)), kernel, lambda);
    const double r_de = fit.value(data.de().row(i).transpose());
    const double r_nu = fit.value(data.nu().row(i).transpose());
    score += 0.5 * r_de * r_de - r_nu;
  }
  return score / static_cast<double>(n_pairs);
}

double select_lambda_loocv(const TwoSampleDataset& data, const GaussianKernel& kernel,
                           std::span<const double> grid, std::vector<double>* scores) {
  if (grid.empty()) throw UsageError("lambda grid must be non-empty");
  double best_lambda = grid[0];
  double best_score = loocv_score(data, kernel, grid[0]);
  if (scores) scores->assign(1, best_score);
  for (std::size_t g = 1; g < grid.size(); ++g) {
    const double s = loocv_score(data, kernel, grid[g]);
    if (scores) scores->push_back(s);
    if (s < best_score) {
      best_score = s;
      best_lambda = grid[g];
    }
  }
  return best_lambda;
}

}  // namespace rieszdr
