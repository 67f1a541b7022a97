#pragma once

#include <cstdint>
#include <functional>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "rieszdr/vendor_json.hpp"

namespace rieszdr::cli {

/// Runs a command body, mapping thrown errors onto the exit-code contract:
/// 0 success, 1 usage, 2 data, 3 numerical.
int run_guarded(const std::function<int()>& body, std::ostream& err = std::cerr);

struct OptimizerOptions {
  int max_iters = 500;
  double step_size = 1.0;
  double grad_tol = 1e-8;

  nlohmann::json to_json() const;
};

struct SynthGenOptions {
  std::string design = "default-confounded";  // or shifted-gaussian
  std::int64_t n = 1000;
  std::int64_t n_de = 500;
  std::int64_t n_nu = 500;
  double shift = 0.5;   // shifted-gaussian: mean shift along the first axis
  std::int64_t dim = 1; // shifted-gaussian covariate dimension
  std::uint64_t seed = 1;
  std::string out;
  std::string emit_oracle;
  bool quiet = false;

  nlohmann::json to_json() const;
};
int cmd_synth_gen(const SynthGenOptions& opt);

struct DreFitOptions {
  std::string data_path;
  std::string loss = "lsif";
  std::string model = "linear:poly:1";
  std::string link;  // empty = default for the loss
  double lambda = 0.0;
  std::string reg = "l2";  // l2 | rkhs
  std::optional<double> nonneg_c;
  int telescope_m = 1;
  OptimizerOptions optimizer;
  std::uint64_t seed = 1;
  std::string out;
  bool quiet = false;

  nlohmann::json to_json() const;
};
int cmd_dre_fit(const DreFitOptions& opt);

struct DreEvalOptions {
  std::string model_path;
  std::string data_path;
  std::string oracle_path;  // optional
  std::string out;
  bool quiet = false;

  nlohmann::json to_json() const;
};
int cmd_dre_eval(const DreEvalOptions& opt);

struct RieszFitOptions {
  std::string data_path;
  std::string objective = "riesz-lsq";
  std::string model = "linear:poly:2";
  bool shared_basis = true;
  double lambda = 0.0;
  OptimizerOptions optimizer;
  std::uint64_t seed = 1;
  std::string out;
  bool quiet = false;

  nlohmann::json to_json() const;
};
int cmd_riesz_fit(const RieszFitOptions& opt);

struct AteEstimateOptions {
  std::string data_path;
  int folds = 5;
  std::string estimator = "debiased";  // debiased | plugin | ipw
  std::string riesz_objective = "riesz-lsq";
  std::string riesz_model = "linear:poly:2";
  double riesz_lambda = 1e-4;
  std::string outcome_model = "linear:poly:1";
  double outcome_lambda = 1e-6;
  double eps_min = 0.01;
  OptimizerOptions optimizer;
  std::uint64_t seed = 1;
  std::string out;
  bool quiet = false;

  nlohmann::json to_json() const;
};
int cmd_ate_estimate(const AteEstimateOptions& opt);

struct EquivalenceOptions {
  std::string data_path;  // empty with synthetic = true draws a dataset
  bool synthetic = false;
  std::int64_t n = 500;
  std::string model = "linear:poly:2";
  int trials = 100;
  double tolerance = 1e-12;
  std::uint64_t seed = 1;
  std::string out;
  bool quiet = false;

  nlohmann::json to_json() const;
};
/// Exit code 0 iff the max relative discrepancy stays within tolerance.
int cmd_equivalence_check(const EquivalenceOptions& opt);

struct SimulateOptions {
  std::string design = "default-confounded";
  std::vector<std::int64_t> n_grid = {2000};
  int reps = 200;
  // debiased | plugin | plugin-misspec | oracle | ipw | naive
  std::vector<std::string> estimators = {"debiased"};
  int folds = 5;
  std::string riesz_objective = "riesz-lsq";
  std::string riesz_model = "linear:poly:2";
  double riesz_lambda = 1e-4;
  std::string outcome_model = "linear:poly:1";
  double outcome_lambda = 1e-6;
  OptimizerOptions optimizer;
  std::uint64_t seed = 1;
  int threads = 0;  // 0 = hardware concurrency
  std::string out;
  bool quiet = false;

  nlohmann::json to_json() const;
};
int cmd_simulate(const SimulateOptions& opt);

}  // namespace rieszdr::cli
