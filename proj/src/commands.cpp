#include "rieszdr/commands.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <memory>
#include <mutex>
#include <random>
#include <thread>

#include "rieszdr/ate.hpp"
#include "rieszdr/csv_io.hpp"
#include "rieszdr/dre.hpp"
#include "rieszdr/kulsif.hpp"
#include "rieszdr/model_spec.hpp"
#include "rieszdr/outcome.hpp"
#include "rieszdr/riesz.hpp"
#include "rieszdr/synthetic.hpp"

namespace rieszdr::cli {

namespace {

nlohmann::json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open '" + path + "'");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw SchemaMismatch("cannot parse '" + path + "': " + e.what());
  }
  return j;
}

void write_json_file(const std::string& path, const nlohmann::json& j) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write '" + path + "'");
  out << j.dump(2) << '\n';
}

// CSV outputs carry their resolved configuration in a sidecar file.
void write_run_config(const std::string& out_path, const nlohmann::json& config) {
  write_json_file(out_path + ".run.json", nlohmann::json{{"config", config}});
}

GdSettings to_gd_settings(const OptimizerOptions& opt) {
  GdSettings s;
  s.max_iters = opt.max_iters;
  s.step_size = opt.step_size;
  s.grad_tol = opt.grad_tol;
  return s;
}

Link default_link_for(const BregmanLoss& loss) {
  switch (loss.kind()) {
    case LossKind::Lsif: return Link::Identity;
    case LossKind::Ukl:
    case LossKind::Bkl: return Link::Exp;
    case LossKind::PuLogLoss: return Link::Sigmoid;
    case LossKind::RieszTailoredUkl: return Link::SoftplusShift;
  }
  return Link::Identity;
}

// A fitted ratio function loaded back from disk: plain or telescoped.
struct LoadedRatio {
  std::optional<RatioModel> ratio;
  std::optional<TelescopedModel> telescoped;

  Eigen::VectorXd values(const Eigen::MatrixXd& x) const {
    return ratio ? ratio->values(x) : telescoped->values(x);
  }
  Eigen::Index input_dim() const {
    return ratio ? ratio->basis().input_dim() : telescoped->stages().front().basis().input_dim();
  }
};

LoadedRatio load_ratio_model(const std::string& path) {
  nlohmann::json j = read_json_file(path);
  if (j.contains("model")) j = j.at("model");
  const std::string type = j.value("type", "");
  LoadedRatio out;
  if (type == "ratio") {
    out.ratio = RatioModel::from_json(j);
  } else if (type == "telescoped") {
    out.telescoped = TelescopedModel::from_json(j);
  } else {
    throw SchemaMismatch("'" + path + "' holds a model of type '" + type +
                         "', expected ratio or telescoped");
  }
  return out;
}

void parallel_for(std::size_t count, int threads, const std::function<void(std::size_t)>& body) {
  int t = threads > 0 ? threads : static_cast<int>(std::thread::hardware_concurrency());
  if (t < 1) t = 1;
  t = std::min<int>(t, static_cast<int>(count));
  if (t <= 1) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(t));
  std::exception_ptr first_error;
  std::mutex error_mutex;
  for (int w = 0; w < t; ++w) {
    pool.emplace_back([&, w]() {
      try {
        for (std::size_t i = static_cast<std::size_t>(w); i < count;
             i += static_cast<std::size_t>(t)) {
          body(i);
        }
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  if (first_error) std::rethrow_exception(first_error);
}

void format_number(std::string& line, double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  line += buf;
}

}  // namespace

int run_guarded(const std::function<int()>& body, std::ostream& err) {
  try {
    return body();
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return static_cast<int>(e.category());
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return static_cast<int>(ErrorCategory::Numeric);
  }
}

nlohmann::json OptimizerOptions::to_json() const {
  return {{"max_iters", max_iters}, {"step_size", step_size}, {"grad_tol", grad_tol}};
}

// --------------------------------------------------------------------------
// synth gen
// --------------------------------------------------------------------------

nlohmann::json SynthGenOptions::to_json() const {
  return {{"subcommand", "synth gen"}, {"design", design}, {"n", n},
          {"n_de", n_de},              {"n_nu", n_nu},     {"shift", shift},
          {"dim", dim},                {"seed", seed},     {"out", out},
          {"emit_oracle", emit_oracle}};
}

int cmd_synth_gen(const SynthGenOptions& opt) {
  if (opt.out.empty()) throw UsageError("synth gen needs --out");
  if (opt.design == "shifted-gaussian") {
    if (opt.dim < 1) throw UsageError("--dim must be >= 1");
    Eigen::VectorXd mu_shift = Eigen::VectorXd::Zero(opt.dim);
    mu_shift(0) = opt.shift;
    auto [data, oracle] = generate_two_sample(mu_shift, opt.n_de, opt.n_nu, opt.seed);
    write_two_sample_csv(opt.out, data);
    if (!opt.emit_oracle.empty()) {
      write_json_file(opt.emit_oracle,
                      {{"type", "two_sample"},
                       {"mu_shift", std::vector<double>(mu_shift.begin(), mu_shift.end())}});
    }
    write_run_config(opt.out, opt.to_json());
    if (!opt.quiet) {
      std::cout << "wrote " << data.n_de() << " de + " << data.n_nu() << " nu rows to " << opt.out
                << " (kl gap " << oracle.kl_gap() << ")\n";
    }
    return 0;
  }

  const SyntheticDesign design = SyntheticDesign::parse(opt.design);
  std::vector<std::string> warnings;
  auto [data, oracle] = generate(design, opt.n, opt.seed, &warnings);
  write_observational_csv(opt.out, data);
  if (!opt.emit_oracle.empty()) write_json_file(opt.emit_oracle, design.to_json());
  write_run_config(opt.out, opt.to_json());
  if (!opt.quiet) {
    for (const auto& w : warnings) std::cerr << "warning: " << w << '\n';
    std::cout << "wrote " << data.n() << " rows to " << opt.out << " (tau0 " << oracle.tau0()
              << ")\n";
  }
  return 0;
}

// --------------------------------------------------------------------------
// dre fit
// --------------------------------------------------------------------------

nlohmann::json DreFitOptions::to_json() const {
  nlohmann::json j{{"subcommand", "dre fit"},
                   {"data", data_path},
                   {"loss", loss},
                   {"model", model},
                   {"link", link},
                   {"lambda", lambda},
                   {"reg", reg},
                   {"telescope_m", telescope_m},
                   {"optimizer", optimizer.to_json()},
                   {"seed", seed},
                   {"out", out}};
  if (nonneg_c) j["nonneg_c"] = *nonneg_c;
  return j;
}

int cmd_dre_fit(const DreFitOptions& opt) {
  if (opt.out.empty()) throw UsageError("dre fit needs --out");
  const TwoSampleDataset data = read_two_sample_csv(opt.data_path);
  const BregmanLoss loss = BregmanLoss::parse(opt.loss);
  const ModelSpec spec = ModelSpec::parse(opt.model);

  nlohmann::json result;
  result["config"] = opt.to_json();

  if (spec.family == ModelSpec::Family::Kulsif) {
    if (loss.kind() != LossKind::Lsif) {
      throw UsageError("kulsif models are least-squares fits; use --loss lsif");
    }
    if (opt.telescope_m != 1) {
      throw UsageError("telescoping is only available for linear:* models");
    }
    Eigen::MatrixXd pooled(data.n_de() + data.n_nu(), data.dim());
    pooled << data.de(), data.nu();
    const double bw = spec.bandwidth ? *spec.bandwidth : median_pairwise_distance(pooled);
    const GaussianKernel kernel(bw);
    double lambda;
    if (spec.kulsif_lambda) {
      lambda = *spec.kulsif_lambda;
    } else {
      std::vector<double> scores;
      lambda = select_lambda_loocv(data, kernel, kDefaultLambdaGrid, &scores);
      result["loocv_scores"] = scores;
    }
    const RatioModel model = kulsif_fit(data, kernel, lambda);
    result["model"] = model.to_json();
    result["bandwidth"] = bw;
    result["lambda"] = lambda;
    write_json_file(opt.out, result);
    if (!opt.quiet) std::cout << "kulsif fit with lambda " << lambda << " -> " << opt.out << '\n';
    return 0;
  }

  Eigen::MatrixXd pooled(data.n_de() + data.n_nu(), data.dim());
  pooled << data.de(), data.nu();
  const BasisExpansion basis = build_basis(spec, pooled, opt.seed);
  const Link link = opt.link.empty() ? default_link_for(loss) : parse_link(opt.link);

  DreFitConfig cfg;
  cfg.loss = loss;
  cfg.reg_lambda = opt.lambda;
  if (opt.reg == "l2") {
    cfg.reg_kind = RegKind::L2Coefficients;
  } else if (opt.reg == "rkhs") {
    cfg.reg_kind = RegKind::RkhsNorm;
  } else {
    throw UsageError("unknown regularizer '" + opt.reg + "' (expected l2|rkhs)");
  }
  cfg.optimizer = to_gd_settings(opt.optimizer);
  cfg.nonneg_c = opt.nonneg_c;
  cfg.seed = opt.seed;

  const RatioModel model0 = RatioModel::zeros(basis, link);
  std::vector<std::string> warnings;
  if (opt.telescope_m == 1) {
    DreFitResult fit = fit_dre(data, model0, cfg);
    warnings = fit.warnings;
    result["model"] = fit.model.to_json();
    result["final_objective"] = fit.trace.objective.back();
    result["iterations"] = fit.trace.iterations;
    result["converged"] = fit.converged;
  } else {
    TelescopeConfig tcfg;
    tcfg.waymarks = opt.telescope_m;
    tcfg.stage = cfg;
    tcfg.seed = opt.seed;
    TelescopeFitResult fit = fit_telescoped(data, model0, tcfg);
    warnings = fit.warnings;
    result["model"] = fit.model.to_json();
  }
  result["warnings"] = warnings;
  write_json_file(opt.out, result);
  if (!opt.quiet) {
    for (const auto& w : warnings) std::cerr << "warning: " << w << '\n';
    std::cout << "fitted " << opt.model << " with loss " << opt.loss << " -> " << opt.out << '\n';
  }
  return 0;
}

// --------------------------------------------------------------------------
// dre eval
// --------------------------------------------------------------------------

nlohmann::json DreEvalOptions::to_json() const {
  return {{"subcommand", "dre eval"},
          {"model", model_path},
          {"data", data_path},
          {"oracle", oracle_path},
          {"out", out}};
}

int cmd_dre_eval(const DreEvalOptions& opt) {
  if (opt.out.empty()) throw UsageError("dre eval needs --out");
  const LoadedRatio model = load_ratio_model(opt.model_path);
  const TwoSampleDataset data = read_two_sample_csv(opt.data_path);
  if (model.input_dim() != data.dim()) {
    throw SchemaMismatch("model expects dimension " + std::to_string(model.input_dim()) +
                         " but the data has " + std::to_string(data.dim()));
  }

  const Eigen::VectorXd r_de = model.values(data.de());
  const Eigen::VectorXd r_nu = model.values(data.nu());

  nlohmann::json metrics;
  metrics["config"] = opt.to_json();
  metrics["n_de"] = data.n_de();
  metrics["n_nu"] = data.n_nu();
  metrics["lsif_risk"] = lsif_empirical_risk(r_de, r_nu);

  if (!opt.oracle_path.empty()) {
    const nlohmann::json oracle_json = read_json_file(opt.oracle_path);
    if (oracle_json.value("type", "") != "two_sample") {
      throw SchemaMismatch("'" + opt.oracle_path + "' is not a two-sample oracle");
    }
    const auto shift = oracle_json.at("mu_shift").get<std::vector<double>>();
    if (static_cast<Eigen::Index>(shift.size()) != data.dim()) {
      throw SchemaMismatch("oracle dimension does not match the data");
    }
    const GaussianShiftOracle oracle(
        Eigen::Map<const Eigen::VectorXd>(shift.data(), static_cast<Eigen::Index>(shift.size())));
    double l2 = 0.0;
    for (Eigen::Index j = 0; j < data.n_de(); ++j) {
      const double diff = r_de(j) - oracle.ratio(data.de().row(j).transpose());
      l2 += diff * diff;
    }
    metrics["l2_error_de"] = l2 / static_cast<double>(data.n_de());
  }

  write_json_file(opt.out, metrics);
  if (!opt.quiet) {
    std::cout << "lsif risk " << metrics["lsif_risk"].get<double>();
    if (metrics.contains("l2_error_de")) {
      std::cout << ", L2(de) error " << metrics["l2_error_de"].get<double>();
    }
    std::cout << " -> " << opt.out << '\n';
  }
  return 0;
}

// --------------------------------------------------------------------------
// riesz fit
// --------------------------------------------------------------------------

nlohmann::json RieszFitOptions::to_json() const {
  return {{"subcommand", "riesz fit"},
          {"data", data_path},
          {"objective", objective},
          {"model", model},
          {"shared_basis", shared_basis},
          {"lambda", lambda},
          {"optimizer", optimizer.to_json()},
          {"seed", seed},
          {"out", out}};
}

namespace {

RieszModel build_riesz_model0(const ObservationalDataset& data, const ModelSpec& spec,
                              RieszObjective objective, bool shared_basis, std::uint64_t seed) {
  const Link link =
      objective == RieszObjective::TailoredUkl ? Link::SoftplusShift : Link::Identity;
  const BasisExpansion basis1 = build_basis(spec, data.x(), seed);
  const BasisExpansion basis0 = shared_basis ? basis1 : build_basis(spec, data.x(), seed + 1);
  return RieszModel(RatioModel::zeros(basis1, link), RatioModel::zeros(basis0, link));
}

}  // namespace

int cmd_riesz_fit(const RieszFitOptions& opt) {
  if (opt.out.empty()) throw UsageError("riesz fit needs --out");
  const ObservationalDataset data = read_observational_csv(opt.data_path);
  const RieszObjective objective = parse_riesz_objective(opt.objective);
  const ModelSpec spec = ModelSpec::parse(opt.model);
  if (spec.family == ModelSpec::Family::Kulsif) {
    throw UsageError("representer fits use linear:* model specs");
  }

  RieszFitConfig cfg;
  cfg.objective = objective;
  cfg.reg_lambda = opt.lambda;
  cfg.optimizer = to_gd_settings(opt.optimizer);
  cfg.seed = opt.seed;

  const RieszModel model0 = build_riesz_model0(data, spec, objective, opt.shared_basis, opt.seed);
  RieszFitResult fit = fit_riesz(data, model0, cfg);

  nlohmann::json result;
  result["config"] = opt.to_json();
  result["model"] = fit.model.to_json();
  result["final_objective"] = fit.trace.objective.back();
  result["iterations"] = fit.trace.iterations;
  result["converged"] = fit.converged;
  result["warnings"] = fit.warnings;
  write_json_file(opt.out, result);
  if (!opt.quiet) {
    for (const auto& w : fit.warnings) std::cerr << "warning: " << w << '\n';
    std::cout << "fitted representer (" << opt.objective << ") -> " << opt.out << '\n';
  }
  return 0;
}

// --------------------------------------------------------------------------
// ate estimate
// --------------------------------------------------------------------------

nlohmann::json AteEstimateOptions::to_json() const {
  return {{"subcommand", "ate estimate"},
          {"data", data_path},
          {"folds", folds},
          {"estimator", estimator},
          {"riesz_objective", riesz_objective},
          {"riesz_model", riesz_model},
          {"riesz_lambda", riesz_lambda},
          {"outcome_model", outcome_model},
          {"outcome_lambda", outcome_lambda},
          {"eps_min", eps_min},
          {"optimizer", optimizer.to_json()},
          {"seed", seed},
          {"out", out}};
}

namespace {

std::function<double(int, const Eigen::VectorXd&)> fit_outcome_fn(
    const ObservationalDataset& train, const ModelSpec& spec, double lambda, std::uint64_t seed) {
  auto model = std::make_shared<OutcomeModel>(
      ridge_outcome_fit(train, build_basis(spec, train.x(), seed), lambda));
  return [model](int d, const Eigen::VectorXd& x) { return model->mu(d, x); };
}

std::function<double(int, const Eigen::VectorXd&)> fit_alpha_fn(
    const ObservationalDataset& train, const ModelSpec& spec, RieszObjective objective,
    double lambda, const GdSettings& optimizer, std::uint64_t seed) {
  RieszFitConfig cfg;
  cfg.objective = objective;
  cfg.reg_lambda = lambda;
  cfg.optimizer = optimizer;
  cfg.seed = seed;
  auto fitted = std::make_shared<RieszModel>(
      fit_riesz(train, build_riesz_model0(train, spec, objective, true, seed), cfg).model);
  return [fitted](int d, const Eigen::VectorXd& x) { return fitted->alpha(d, x); };
}

struct AteNuisanceSetup {
  ModelSpec outcome_spec;
  double outcome_lambda = 1e-6;
  ModelSpec riesz_spec;
  RieszObjective riesz_objective = RieszObjective::LeastSquares;
  double riesz_lambda = 1e-4;
  GdSettings optimizer;
  std::uint64_t seed = 1;
};

NuisanceFitter make_fitted_nuisances(const AteNuisanceSetup& setup) {
  return [setup](const ObservationalDataset& train) {
    NuisanceFns fns;
    fns.mu = fit_outcome_fn(train, setup.outcome_spec, setup.outcome_lambda, setup.seed);
    fns.alpha = fit_alpha_fn(train, setup.riesz_spec, setup.riesz_objective, setup.riesz_lambda,
                             setup.optimizer, setup.seed);
    return fns;
  };
}

NuisanceFitter make_ipw_nuisances(const AteNuisanceSetup& setup) {
  return [setup](const ObservationalDataset& train) {
    NuisanceFns fns;
    fns.mu = [](int, const Eigen::VectorXd&) { return 0.0; };
    fns.alpha = fit_alpha_fn(train, setup.riesz_spec, setup.riesz_objective, setup.riesz_lambda,
                             setup.optimizer, setup.seed);
    return fns;
  };
}

}  // namespace

int cmd_ate_estimate(const AteEstimateOptions& opt) {
  if (opt.out.empty()) throw UsageError("ate estimate needs --out");
  const ObservationalDataset data = read_observational_csv(opt.data_path);

  AteNuisanceSetup setup;
  setup.outcome_spec = ModelSpec::parse(opt.outcome_model);
  setup.outcome_lambda = opt.outcome_lambda;
  setup.riesz_spec = ModelSpec::parse(opt.riesz_model);
  setup.riesz_objective = parse_riesz_objective(opt.riesz_objective);
  setup.riesz_lambda = opt.riesz_lambda;
  setup.optimizer = to_gd_settings(opt.optimizer);
  setup.seed = opt.seed;

  AteReport report;
  if (opt.estimator == "debiased") {
    report = estimate_ate_debiased(data, opt.folds, make_fitted_nuisances(setup), opt.seed,
                                   opt.eps_min);
  } else if (opt.estimator == "ipw") {
    report =
        estimate_ate_debiased(data, opt.folds, make_ipw_nuisances(setup), opt.seed, opt.eps_min);
    report.kind = EstimatorKind::Ipw;
  } else if (opt.estimator == "plugin") {
    const auto spec = setup.outcome_spec;
    const double lambda = setup.outcome_lambda;
    const auto seed = setup.seed;
    report = estimate_ate_plugin(
        data, opt.folds,
        [&](const ObservationalDataset& train) {
          return fit_outcome_fn(train, spec, lambda, seed);
        },
        opt.seed);
  } else {
    throw UsageError("unknown estimator '" + opt.estimator + "' (expected debiased|plugin|ipw)");
  }

  nlohmann::json out = report.to_json();
  out["config"] = opt.to_json();
  write_json_file(opt.out, out);
  if (!opt.quiet) {
    std::cout << opt.estimator << " tau_hat " << report.tau_hat << " (se " << report.se << ", ci ["
              << report.ci_low << ", " << report.ci_high << "]) -> " << opt.out << '\n';
    if (report.overlap_warning) {
      std::cerr << "warning: fitted ratios exceed 1/eps_min; overlap looks thin\n";
    }
  }
  return 0;
}

// --------------------------------------------------------------------------
// equivalence-check
// --------------------------------------------------------------------------

nlohmann::json EquivalenceOptions::to_json() const {
  return {{"subcommand", "equivalence-check"},
          {"data", data_path},
          {"synthetic", synthetic},
          {"n", n},
          {"model", model},
          {"trials", trials},
          {"tolerance", tolerance},
          {"seed", seed},
          {"out", out}};
}

int cmd_equivalence_check(const EquivalenceOptions& opt) {
  if (opt.trials < 1) throw UsageError("equivalence-check needs --trials >= 1");
  std::optional<ObservationalDataset> data;
  if (!opt.data_path.empty()) {
    data = read_observational_csv(opt.data_path);
  } else if (opt.synthetic) {
    data = generate(SyntheticDesign::default_confounded(), opt.n, opt.seed).first;
  } else {
    throw UsageError("equivalence-check needs --data or --synthetic");
  }

  const ModelSpec spec = ModelSpec::parse(opt.model);
  if (spec.family == ModelSpec::Family::Kulsif) {
    throw UsageError("equivalence-check uses linear:* model specs");
  }
  const BasisExpansion basis = build_basis(spec, data->x(), opt.seed);

  double max_disc = 0.0;
  for (int trial = 0; trial < opt.trials; ++trial) {
    std::mt19937_64 rng(mix_seed(opt.seed, static_cast<std::uint64_t>(trial)));
    std::normal_distribution<double> normal(0.0, 1.0);
    Eigen::VectorXd theta1(basis.dim()), theta0(basis.dim());
    for (Eigen::Index j = 0; j < basis.dim(); ++j) theta1(j) = normal(rng);
    for (Eigen::Index j = 0; j < basis.dim(); ++j) theta0(j) = normal(rng);

    const RatioModel r1(basis, Link::Identity, theta1);
    const RatioModel r0(basis, Link::Identity, theta0);
    const double paired = paired_lsif_risk(r1, r0, *data, false).value;
    const double viaAlpha = riesz_empirical_risk(alpha_from_ratios(r1, r0), *data, false).value;
    const double disc =
        std::abs(paired - viaAlpha) / std::max({1.0, std::abs(paired), std::abs(viaAlpha)});
    max_disc = std::max(max_disc, disc);
  }

  const bool ok = max_disc <= opt.tolerance;
  if (!opt.out.empty()) {
    write_json_file(opt.out, {{"config", opt.to_json()},
                              {"max_relative_discrepancy", max_disc},
                              {"tolerance", opt.tolerance},
                              {"trials", opt.trials},
                              {"pass", ok}});
  }
  if (!opt.quiet) {
    std::cout << "max relative discrepancy over " << opt.trials << " trials: " << max_disc
              << (ok ? " (pass)" : " (FAIL)") << '\n';
  }
  return ok ? 0 : static_cast<int>(ErrorCategory::Numeric);
}

// --------------------------------------------------------------------------
// simulate
// --------------------------------------------------------------------------

nlohmann::json SimulateOptions::to_json() const {
  return {{"subcommand", "simulate"},
          {"design", design},
          {"n_grid", n_grid},
          {"reps", reps},
          {"estimators", estimators},
          {"folds", folds},
          {"riesz_objective", riesz_objective},
          {"riesz_model", riesz_model},
          {"riesz_lambda", riesz_lambda},
          {"outcome_model", outcome_model},
          {"outcome_lambda", outcome_lambda},
          {"optimizer", optimizer.to_json()},
          {"seed", seed},
          {"threads", threads},
          {"out", out}};
}

namespace {

// Drops the first covariate column, the deliberate misspecification used to
// contrast the plug-in estimator with the debiased one.
ObservationalDataset drop_first_covariate(const ObservationalDataset& data) {
  if (data.dim() < 2) throw UsageError("misspecified fits need at least 2 covariates");
  return ObservationalDataset(data.x().rightCols(data.dim() - 1), data.d(), data.y());
}

struct SimResult {
  double tau_hat = 0.0;
  double se = 0.0;
  int covered = 0;
};

SimResult naive_difference_of_means(const ObservationalDataset& data, double tau0) {
  double s1 = 0.0, s0 = 0.0;
  Eigen::Index n1 = 0, n0 = 0;
  for (Eigen::Index i = 0; i < data.n(); ++i) {
    if (data.d()(i) == 1.0) {
      s1 += data.y()(i);
      ++n1;
    } else {
      s0 += data.y()(i);
      ++n0;
    }
  }
  const double m1 = s1 / static_cast<double>(n1);
  const double m0 = s0 / static_cast<double>(n0);
  double v1 = 0.0, v0 = 0.0;
  for (Eigen::Index i = 0; i < data.n(); ++i) {
    const double dev = data.y()(i) - (data.d()(i) == 1.0 ? m1 : m0);
    (data.d()(i) == 1.0 ? v1 : v0) += dev * dev;
  }
  v1 /= static_cast<double>(n1);
  v0 /= static_cast<double>(n0);
  SimResult r;
  r.tau_hat = m1 - m0;
  r.se = std::sqrt(v1 / static_cast<double>(n1) + v0 / static_cast<double>(n0));
  r.covered = (r.tau_hat - 1.96 * r.se <= tau0 && tau0 <= r.tau_hat + 1.96 * r.se) ? 1 : 0;
  return r;
}

}  // namespace

int cmd_simulate(const SimulateOptions& opt) {
  if (opt.out.empty()) throw UsageError("simulate needs --out");
  if (opt.reps < 1) throw UsageError("simulate needs --reps >= 1");
  if (opt.n_grid.empty()) throw UsageError("simulate needs a non-empty n grid");
  if (opt.estimators.empty()) throw UsageError("simulate needs at least one estimator");
  const SyntheticDesign design = SyntheticDesign::parse(opt.design);
  const double tau0 = design.tau_base;

  AteNuisanceSetup setup;
  setup.outcome_spec = ModelSpec::parse(opt.outcome_model);
  setup.outcome_lambda = opt.outcome_lambda;
  setup.riesz_spec = ModelSpec::parse(opt.riesz_model);
  setup.riesz_objective = parse_riesz_objective(opt.riesz_objective);
  setup.riesz_lambda = opt.riesz_lambda;
  setup.optimizer = to_gd_settings(opt.optimizer);

  for (const auto& est : opt.estimators) {
    if (est != "debiased" && est != "plugin" && est != "plugin-misspec" && est != "oracle" &&
        est != "ipw" && est != "naive") {
      throw UsageError("unknown estimator '" + est +
                       "' (expected debiased|plugin|plugin-misspec|oracle|ipw|naive)");
    }
  }

  struct Task {
    std::int64_t n;
    int rep;
    std::size_t est_idx;
  };
  std::vector<Task> tasks;
  for (std::int64_t n : opt.n_grid) {
    for (std::size_t e = 0; e < opt.estimators.size(); ++e) {
      for (int rep = 0; rep < opt.reps; ++rep) tasks.push_back({n, rep, e});
    }
  }

  struct Row {
    SimResult res;
    double runtime_ms = 0.0;
  };
  std::vector<Row> rows(tasks.size());

  parallel_for(tasks.size(), opt.threads, [&](std::size_t t) {
    const Task& task = tasks[t];
    // Replication seeds are seed xor rep so results do not depend on the
    // worker count or schedule.
    const std::uint64_t rep_seed = opt.seed ^ static_cast<std::uint64_t>(task.rep);
    const auto t0 = std::chrono::steady_clock::now();

    auto [data, oracle] = generate(design, task.n, rep_seed);
    const std::string& est = opt.estimators[task.est_idx];
    AteNuisanceSetup rep_setup = setup;
    rep_setup.seed = rep_seed;

    SimResult res;
    if (est == "naive") {
      res = naive_difference_of_means(data, tau0);
    } else {
      AteReport report;
      if (est == "debiased") {
        report = estimate_ate_debiased(data, opt.folds, make_fitted_nuisances(rep_setup),
                                       rep_seed);
      } else if (est == "ipw") {
        report = estimate_ate_debiased(data, opt.folds, make_ipw_nuisances(rep_setup), rep_seed);
      } else if (est == "oracle") {
        NuisanceFitter fitter = [&oracle](const ObservationalDataset&) {
          NuisanceFns fns;
          const SyntheticOracle truth = oracle;
          fns.mu = [truth](int d, const Eigen::VectorXd& x) { return truth.mu(d, x); };
          fns.alpha = [truth](int d, const Eigen::VectorXd& x) { return truth.alpha(d, x); };
          return fns;
        };
        report = estimate_ate_debiased(data, opt.folds, fitter, rep_seed);
      } else if (est == "plugin") {
        report = estimate_ate_plugin(
            data, opt.folds,
            [&](const ObservationalDataset& train) {
              return fit_outcome_fn(train, rep_setup.outcome_spec, rep_setup.outcome_lambda,
                                    rep_seed);
            },
            rep_seed);
      } else {  // plugin-misspec
        report = estimate_ate_plugin(
            data, opt.folds,
            [&](const ObservationalDataset& train) {
              auto mu = fit_outcome_fn(drop_first_covariate(train), rep_setup.outcome_spec,
                                       rep_setup.outcome_lambda, rep_seed);
              return [mu](int d, const Eigen::VectorXd& x) {
                return mu(d, x.tail(x.size() - 1));
              };
            },
            rep_seed);
      }
      res.tau_hat = report.tau_hat;
      res.se = report.se;
      res.covered = (report.ci_low <= tau0 && tau0 <= report.ci_high) ? 1 : 0;
    }

    const auto t1 = std::chrono::steady_clock::now();
    rows[t].res = res;
    rows[t].runtime_ms = std::chrono::duration<double, std::milli>(t1 - t0).count();
  });

  std::ofstream out(opt.out);
  if (!out) throw DataError("cannot write '" + opt.out + "'");
  out << "design,n,rep,estimator,tau_hat,se,covered,runtime_ms\n";
  for (std::size_t t = 0; t < tasks.size(); ++t) {
    std::string line = opt.design;
    line += ',';
    line += std::to_string(tasks[t].n);
    line += ',';
    line += std::to_string(tasks[t].rep);
    line += ',';
    line += opt.estimators[tasks[t].est_idx];
    line += ',';
    format_number(line, rows[t].res.tau_hat);
    line += ',';
    format_number(line, rows[t].res.se);
    line += ',';
    line += std::to_string(rows[t].res.covered);
    line += ',';
    format_number(line, rows[t].runtime_ms);
    line += '\n';
    out << line;
  }
  out.close();
  write_run_config(opt.out, opt.to_json());
  if (!opt.quiet) {
    std::cout << "wrote " << tasks.size() << " rows to " << opt.out << '\n';
  }
  return 0;
}

}  // namespace rieszdr::cli
