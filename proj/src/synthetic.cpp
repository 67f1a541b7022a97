#include "rieszdr/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace rieszdr {

void SyntheticDesign::validate() const {
  if (!(eps > 0.0 && eps < 0.5)) {
    throw DegenerateDesign("overlap bound eps must lie in (0, 0.5), got " + std::to_string(eps));
  }
  if (beta.size() < 1) throw DegenerateDesign("design needs at least one covariate");
  if (gamma0.size() != beta.size() || gamma1.size() != beta.size()) {
    throw DegenerateDesign("beta, gamma0 and gamma1 must share the covariate dimension");
  }
  if (!(noise_sd >= 0.0)) throw DegenerateDesign("noise_sd must be >= 0");
}

SyntheticDesign SyntheticDesign::default_confounded() {
  SyntheticDesign d;
  d.beta = Eigen::Vector2d(0.8, -0.6);
  d.intercept = 0.0;
  d.eps = 0.05;
  d.gamma0 = Eigen::Vector2d(1.0, 0.6);
  d.gamma1 = Eigen::Vector2d(0.3, -0.3);
  d.tau_base = 1.0;
  d.noise_sd = 1.0;
  return d;
}

SyntheticDesign SyntheticDesign::no_confounding() {
  SyntheticDesign d = default_confounded();
  d.beta.setZero();  // e0 constant at 1/2
  return d;
}

SyntheticDesign SyntheticDesign::parse(const std::string& token) {
  if (token == "default-confounded") return default_confounded();
  if (token == "no-confounding") return no_confounding();
  throw UsageError("unknown design '" + token +
                   "' (expected default-confounded|no-confounding)");
}

nlohmann::json SyntheticDesign::to_json() const {
  nlohmann::json j;
  j["type"] = "observational";
  j["beta"] = std::vector<double>(beta.begin(), beta.end());
  j["intercept"] = intercept;
  j["eps"] = eps;
  j["gamma0"] = std::vector<double>(gamma0.begin(), gamma0.end());
  j["gamma1"] = std::vector<double>(gamma1.begin(), gamma1.end());
  j["tau_base"] = tau_base;
  j["tau0"] = tau_base;
  j["noise_sd"] = noise_sd;
  return j;
}

double SyntheticOracle::e0(const Eigen::VectorXd& x) const {
  const double z = design_.beta.dot(x) + design_.intercept;
  const double p = 1.0 / (1.0 + std::exp(-z));
  return std::clamp(p, design_.eps, 1.0 - design_.eps);
}

double SyntheticOracle::alpha(int d, const Eigen::VectorXd& x) const {
  return d == 1 ? r1(x) : -r0(x);
}

double SyntheticOracle::mu(int d, const Eigen::VectorXd& x) const {
  double v = design_.gamma0.dot(x);
  if (d == 1) v += design_.tau_base + design_.gamma1.dot(x);
  return v;
}

std::pair<ObservationalDataset, SyntheticOracle> generate(
    const SyntheticDesign& design, Eigen::Index n, std::uint64_t seed,
    std::vector<std::string>* warnings) {
  design.validate();
  if (n < 2) throw UsageError("need n >= 2");
  SyntheticOracle oracle(design);

  const int max_attempts = 64;
  for (int attempt = 0; attempt < max_attempts; ++attempt) {
    std::mt19937_64 rng(seed + static_cast<std::uint64_t>(attempt));
    std::normal_distribution<double> normal(0.0, 1.0);
    std::uniform_real_distribution<double> uniform(0.0, 1.0);

    Eigen::MatrixXd x(n, design.dim());
    Eigen::VectorXd d(n), y(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      for (Eigen::Index j = 0; j < design.dim(); ++j) x(i, j) = normal(rng);
      const Eigen::VectorXd xi = x.row(i).transpose();
      d(i) = uniform(rng) < oracle.e0(xi) ? 1.0 : 0.0;
      y(i) = oracle.mu(static_cast<int>(d(i)), xi) + design.noise_sd * normal(rng);
    }
    const double treated = d.sum();
    if (treated == 0.0 || treated == static_cast<double>(n)) {
      if (warnings) {
        warnings->push_back("draw with seed " + std::to_string(seed + attempt) +
                            " missed a treatment arm; retrying with the next seed");
      }
      continue;
    }
    return {ObservationalDataset(std::move(x), std::move(d), std::move(y)), oracle};
  }
  throw DataError("could not draw a dataset with both treatment arms in " +
                  std::to_string(max_attempts) + " attempts");
}

double GaussianShiftOracle::ratio(const Eigen::VectorXd& x) const {
  return std::exp(mu_shift_.dot(x) - 0.5 * mu_shift_.squaredNorm());
}

std::pair<TwoSampleDataset, GaussianShiftOracle> generate_two_sample(
    const Eigen::VectorXd& mu_shift, Eigen::Index n_de, Eigen::Index n_nu, std::uint64_t seed) {
  if (mu_shift.size() < 1) throw UsageError("mu_shift must have at least one coordinate");
  if (n_de < 1 || n_nu < 1) throw UsageError("need n_de >= 1 and n_nu >= 1");

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  const Eigen::Index dim = mu_shift.size();

  Eigen::MatrixXd de(n_de, dim), nu(n_nu, dim);
  for (Eigen::Index i = 0; i < n_de; ++i) {
    for (Eigen::Index j = 0; j < dim; ++j) de(i, j) = normal(rng);
  }
  for (Eigen::Index i = 0; i < n_nu; ++i) {
    for (Eigen::Index j = 0; j < dim; ++j) nu(i, j) = mu_shift(j) + normal(rng);
  }
  return {TwoSampleDataset(std::move(de), std::move(nu)), GaussianShiftOracle(mu_shift)};
}

}  // namespace rieszdr
