#include <CLI11.hpp>
#include <algorithm>
#include <fstream>

#include "rieszdr/commands.hpp"

using namespace rieszdr::cli;

namespace {

void add_optimizer_flags(CLI::App* cmd, OptimizerOptions& opt) {
  cmd->add_option("--max-iters", opt.max_iters, "optimizer iteration cap")->capture_default_str();
  cmd->add_option("--step", opt.step_size, "initial line-search step")->capture_default_str();
  cmd->add_option("--grad-tol", opt.grad_tol, "gradient-norm stopping tolerance")
      ->capture_default_str();
}

void add_common_flags(CLI::App* cmd, std::uint64_t& seed, std::string& out, bool& quiet,
                      std::string& config, bool out_required = true) {
  cmd->add_option("--seed", seed, "rng seed")->capture_default_str();
  auto* o = cmd->add_option("--out", out, "output path");
  if (out_required) o->required();
  cmd->add_flag("--quiet", quiet, "suppress progress output");
  cmd->add_option("--config", config,
                  "flat key=value file supplying defaults; explicit flags win");
}

// Flat key=value config support: keys become --key=value tokens appended to
// the command line, skipped when the flag is already present.
std::vector<std::string> expand_config_args(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  std::string config_path;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) {
      config_path = args[i + 1];
      break;
    }
    if (args[i].rfind("--config=", 0) == 0) {
      config_path = args[i].substr(9);
      break;
    }
  }
  if (config_path.empty()) return args;

  std::ifstream in(config_path);
  if (!in) throw CLI::FileError("cannot open config file '" + config_path + "'");
  auto has_flag = [&](const std::string& key) {
    const std::string plain = "--" + key;
    const std::string assigned = plain + "=";
    for (const auto& a : args) {
      if (a == plain || a.rfind(assigned, 0) == 0) return true;
    }
    return false;
  };
  std::string line;
  while (std::getline(in, line)) {
    const std::size_t b = line.find_first_not_of(" \t\r");
    if (b == std::string::npos || line[b] == '#' || line[b] == ';') continue;
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos) {
      throw CLI::FileError("config line is not key=value: '" + line + "'");
    }
    auto trim = [](std::string s) {
      const std::size_t lo = s.find_first_not_of(" \t\r");
      const std::size_t hi = s.find_last_not_of(" \t\r");
      return lo == std::string::npos ? std::string() : s.substr(lo, hi - lo + 1);
    };
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty() || key == "config") continue;
    if (!has_flag(key)) args.push_back("--" + key + "=" + value);
  }
  return args;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Density-ratio and Riesz-representer fitting with a debiased ATE pipeline"};
  app.require_subcommand(1);
  int rc = 0;
  std::string config_path;  // recorded per subcommand; applied by expand_config_args

  SynthGenOptions synth_opt;
  auto* synth = app.add_subcommand("synth", "synthetic data generators");
  synth->require_subcommand(1);
  auto* gen = synth->add_subcommand("gen", "draw a dataset with a known oracle");
  gen->add_option("--design", synth_opt.design,
                  "default-confounded | no-confounding | shifted-gaussian")
      ->capture_default_str();
  gen->add_option("--n", synth_opt.n, "observational sample size")->capture_default_str();
  gen->add_option("--n-de", synth_opt.n_de, "denominator sample size (shifted-gaussian)")
      ->capture_default_str();
  gen->add_option("--n-nu", synth_opt.n_nu, "numerator sample size (shifted-gaussian)")
      ->capture_default_str();
  gen->add_option("--shift", synth_opt.shift, "mean shift along the first axis")
      ->capture_default_str();
  gen->add_option("--dim", synth_opt.dim, "covariate dimension (shifted-gaussian)")
      ->capture_default_str();
  gen->add_option("--emit-oracle", synth_opt.emit_oracle, "also write the oracle json here");
  add_common_flags(gen, synth_opt.seed, synth_opt.out, synth_opt.quiet, config_path);
  gen->callback([&] { rc = run_guarded([&] { return cmd_synth_gen(synth_opt); }); });

  DreFitOptions dre_fit_opt;
  DreEvalOptions dre_eval_opt;
  auto* dre = app.add_subcommand("dre", "direct density-ratio estimation");
  dre->require_subcommand(1);
  auto* dre_fit = dre->add_subcommand("fit", "fit a ratio model on a two-sample csv");
  dre_fit->add_option("--data", dre_fit_opt.data_path, "two-sample csv")->required();
  dre_fit->add_option("--loss", dre_fit_opt.loss, "lsif | ukl | bkl | pu:<C>")
      ->capture_default_str();
  dre_fit->add_option("--model", dre_fit_opt.model, "model spec")->capture_default_str();
  dre_fit->add_option("--link", dre_fit_opt.link, "identity | exp | sigmoid (default per loss)");
  dre_fit->add_option("--lambda", dre_fit_opt.lambda, "regularization weight")
      ->capture_default_str();
  dre_fit->add_option("--reg", dre_fit_opt.reg, "l2 | rkhs")->capture_default_str();
  dre_fit->add_option("--nonneg-c", dre_fit_opt.nonneg_c,
                      "enable the nonnegative correction with this constant");
  dre_fit->add_option("--telescope-m", dre_fit_opt.telescope_m, "waymark count (1 = off)")
      ->capture_default_str();
  add_optimizer_flags(dre_fit, dre_fit_opt.optimizer);
  add_common_flags(dre_fit, dre_fit_opt.seed, dre_fit_opt.out, dre_fit_opt.quiet, config_path);
  dre_fit->callback([&] { rc = run_guarded([&] { return cmd_dre_fit(dre_fit_opt); }); });

  auto* dre_eval = dre->add_subcommand("eval", "evaluate a fitted model on a two-sample csv");
  dre_eval->add_option("--model", dre_eval_opt.model_path, "model json")->required();
  dre_eval->add_option("--data", dre_eval_opt.data_path, "two-sample csv")->required();
  dre_eval->add_option("--oracle", dre_eval_opt.oracle_path, "oracle json (optional)");
  std::uint64_t dre_eval_seed = 1;  // accepted for interface symmetry; evaluation is exact
  add_common_flags(dre_eval, dre_eval_seed, dre_eval_opt.out, dre_eval_opt.quiet, config_path);
  dre_eval->callback([&] { rc = run_guarded([&] { return cmd_dre_eval(dre_eval_opt); }); });

  RieszFitOptions riesz_opt;
  auto* riesz = app.add_subcommand("riesz", "representer estimation");
  riesz->require_subcommand(1);
  auto* riesz_fit_cmd = riesz->add_subcommand("fit", "fit representer heads on an observational csv");
  riesz_fit_cmd->add_option("--data", riesz_opt.data_path, "observational csv")->required();
  riesz_fit_cmd->add_option("--objective", riesz_opt.objective,
                            "riesz-lsq | paired-lsif | riesz-ukl")
      ->capture_default_str();
  riesz_fit_cmd->add_option("--model", riesz_opt.model, "model spec")->capture_default_str();
  riesz_fit_cmd->add_flag("--shared-basis,!--separate-heads", riesz_opt.shared_basis,
                          "share the basis between heads (default) or fit separate ones");
  riesz_fit_cmd->add_option("--lambda", riesz_opt.lambda, "l2 weight")->capture_default_str();
  add_optimizer_flags(riesz_fit_cmd, riesz_opt.optimizer);
  add_common_flags(riesz_fit_cmd, riesz_opt.seed, riesz_opt.out, riesz_opt.quiet, config_path);
  riesz_fit_cmd->callback([&] { rc = run_guarded([&] { return cmd_riesz_fit(riesz_opt); }); });

  AteEstimateOptions ate_opt;
  auto* ate = app.add_subcommand("ate", "average treatment effect estimation");
  ate->require_subcommand(1);
  auto* ate_est = ate->add_subcommand("estimate", "cross-fitted effect estimate with a 95% ci");
  ate_est->add_option("--data", ate_opt.data_path, "observational csv")->required();
  ate_est->add_option("--folds", ate_opt.folds, "cross-fitting folds")->capture_default_str();
  ate_est->add_option("--estimator", ate_opt.estimator, "debiased | plugin | ipw")
      ->capture_default_str();
  ate_est->add_option("--riesz-objective", ate_opt.riesz_objective,
                      "riesz-lsq | paired-lsif | riesz-ukl")
      ->capture_default_str();
  ate_est->add_option("--riesz-model", ate_opt.riesz_model, "representer model spec")
      ->capture_default_str();
  ate_est->add_option("--riesz-lambda", ate_opt.riesz_lambda, "representer l2 weight")
      ->capture_default_str();
  ate_est->add_option("--outcome-model", ate_opt.outcome_model, "outcome model spec")
      ->capture_default_str();
  ate_est->add_option("--outcome-lambda", ate_opt.outcome_lambda, "outcome ridge weight")
      ->capture_default_str();
  ate_est->add_option("--eps-min", ate_opt.eps_min, "overlap warning threshold")
      ->capture_default_str();
  add_optimizer_flags(ate_est, ate_opt.optimizer);
  add_common_flags(ate_est, ate_opt.seed, ate_opt.out, ate_opt.quiet, config_path);
  ate_est->callback([&] { rc = run_guarded([&] { return cmd_ate_estimate(ate_opt); }); });

  EquivalenceOptions equiv_opt;
  auto* equiv = app.add_subcommand(
      "equivalence-check", "check the representer-objective / paired-ratio-objective identity");
  equiv->add_option("--data", equiv_opt.data_path, "observational csv");
  equiv->add_flag("--synthetic", equiv_opt.synthetic, "draw a synthetic dataset instead");
  equiv->add_option("--n", equiv_opt.n, "synthetic sample size")->capture_default_str();
  equiv->add_option("--model", equiv_opt.model, "model spec for the random heads")
      ->capture_default_str();
  equiv->add_option("--trials", equiv_opt.trials, "random model pairs to test")
      ->capture_default_str();
  equiv->add_option("--tolerance", equiv_opt.tolerance, "max allowed relative discrepancy")
      ->capture_default_str();
  add_common_flags(equiv, equiv_opt.seed, equiv_opt.out, equiv_opt.quiet, config_path,
                   /*out_required=*/false);
  equiv->callback([&] { rc = run_guarded([&] { return cmd_equivalence_check(equiv_opt); }); });

  SimulateOptions sim_opt;
  auto* sim = app.add_subcommand("simulate", "replicated estimator study, long-format csv");
  sim->add_option("--design", sim_opt.design, "default-confounded | no-confounding")
      ->capture_default_str();
  sim->add_option("--n", sim_opt.n_grid, "sample sizes (comma separated)")
      ->delimiter(',')
      ->capture_default_str();
  sim->add_option("--reps", sim_opt.reps, "replications per cell")->capture_default_str();
  sim->add_option("--estimators", sim_opt.estimators,
                  "debiased | plugin | plugin-misspec | oracle | ipw | naive")
      ->delimiter(',')
      ->capture_default_str();
  sim->add_option("--folds", sim_opt.folds, "cross-fitting folds")->capture_default_str();
  sim->add_option("--riesz-objective", sim_opt.riesz_objective, "representer objective")
      ->capture_default_str();
  sim->add_option("--riesz-model", sim_opt.riesz_model, "representer model spec")
      ->capture_default_str();
  sim->add_option("--riesz-lambda", sim_opt.riesz_lambda, "representer l2 weight")
      ->capture_default_str();
  sim->add_option("--outcome-model", sim_opt.outcome_model, "outcome model spec")
      ->capture_default_str();
  sim->add_option("--outcome-lambda", sim_opt.outcome_lambda, "outcome ridge weight")
      ->capture_default_str();
  sim->add_option("--threads", sim_opt.threads, "worker threads (0 = all cores)")
      ->capture_default_str();
  add_optimizer_flags(sim, sim_opt.optimizer);
  add_common_flags(sim, sim_opt.seed, sim_opt.out, sim_opt.quiet, config_path);
  sim->callback([&] { rc = run_guarded([&] { return cmd_simulate(sim_opt); }); });

  try {
    std::vector<std::string> args = expand_config_args(argc, argv);
    std::reverse(args.begin(), args.end());  // CLI11 consumes from the back
    app.parse(std::move(args));
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help and friends
    app.exit(e);
    return 1;  // usage error
  }
  return rc;
}
