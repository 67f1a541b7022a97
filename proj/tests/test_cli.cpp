#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "rieszdr/commands.hpp"
#include "rieszdr/csv_io.hpp"
#include "rieszdr/ratio_model.hpp"
#include "rieszdr/synthetic.hpp"
#include "test_support.hpp"

using namespace rieszdr;
using namespace rieszdr::cli;

namespace {

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  REQUIRE(in);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

nlohmann::json read_json(const std::string& path) { return nlohmann::json::parse(slurp(path)); }

int run_cli(const std::string& args) {
  const std::string cmd = std::string(RIESZDR_CLI_PATH) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WEXITSTATUS(status);
}

struct TempFile {
  explicit TempFile(std::string p) : path(std::move(p)) {}
  ~TempFile() { std::remove(path.c_str()); }
  std::string path;
};

}  // namespace

TEST_CASE("usage errors exit with code 1") {
  EquivalenceOptions opt;
  opt.synthetic = true;
  opt.trials = 0;
  opt.quiet = true;
  std::ostringstream sink;
  CHECK(run_guarded([&] { return cmd_equivalence_check(opt); }, sink) == 1);
}

TEST_CASE("data errors exit with code 2") {
  TempFile bad("cli_bad.csv");
  {
    std::ofstream out(bad.path);
    out << "x1,d,y\noops,1,2\n";
  }
  EquivalenceOptions opt;
  opt.data_path = bad.path;
  opt.quiet = true;
  std::ostringstream sink;
  CHECK(run_guarded([&] { return cmd_equivalence_check(opt); }, sink) == 2);
}

TEST_CASE("numerical failures exit with code 3") {
  // identity link starts at r = 0, outside the ukl domain
  TempFile data("cli_ukl.csv");
  {
    SynthGenOptions gen;
    gen.design = "shifted-gaussian";
    gen.n_de = 30;
    gen.n_nu = 30;
    gen.out = data.path;
    gen.quiet = true;
    REQUIRE(cmd_synth_gen(gen) == 0);
  }
  TempFile run_cfg(data.path + ".run.json");
  DreFitOptions opt;
  opt.data_path = data.path;
  opt.loss = "ukl";
  opt.link = "identity";
  opt.out = "cli_ukl_model.json";
  opt.quiet = true;
  TempFile model(opt.out);
  std::ostringstream sink;
  CHECK(run_guarded([&] { return cmd_dre_fit(opt); }, sink) == 3);
}

TEST_CASE("equivalence check passes and writes its report") {
  EquivalenceOptions opt;
  opt.synthetic = true;
  opt.n = 300;
  opt.trials = 50;
  opt.seed = 4;
  opt.out = "cli_equiv.json";
  opt.quiet = true;
  TempFile report(opt.out);
  CHECK(cmd_equivalence_check(opt) == 0);
  const auto j = read_json(opt.out);
  CHECK(j.at("pass").get<bool>());
  CHECK(j.at("max_relative_discrepancy").get<double>() <= 1e-12);
  CHECK(j.at("config").at("seed").get<std::uint64_t>() == 4);
}

TEST_CASE("generated datasets are byte-identical given the seed") {
  SynthGenOptions gen;
  gen.n = 120;
  gen.seed = 77;
  gen.quiet = true;
  gen.out = "cli_det_a.csv";
  TempFile a(gen.out), a_cfg(gen.out + ".run.json");
  REQUIRE(cmd_synth_gen(gen) == 0);
  gen.out = "cli_det_b.csv";
  TempFile b(gen.out), b_cfg(gen.out + ".run.json");
  REQUIRE(cmd_synth_gen(gen) == 0);
  CHECK(slurp(a.path) == slurp(b.path));
}

TEST_CASE("simulation emits one row per (n, estimator, rep)") {
  SimulateOptions opt;
  opt.n_grid = {200};
  opt.reps = 1;
  opt.estimators = {"naive"};
  opt.out = "cli_sim.csv";
  opt.threads = 1;
  opt.quiet = true;
  TempFile out(opt.out), cfg(opt.out + ".run.json");
  REQUIRE(cmd_simulate(opt) == 0);
  const std::string text = slurp(opt.out);
  CHECK(text.rfind("design,n,rep,estimator,tau_hat,se,covered,runtime_ms\n", 0) == 0);
  CHECK(std::count(text.begin(), text.end(), '\n') == 2);  // header + one row
  // sidecar run config records the resolved options
  CHECK(read_json(cfg.path).at("config").at("reps").get<int>() == 1);
}

TEST_CASE("simulation results do not depend on the worker count") {
  SimulateOptions opt;
  opt.n_grid = {150};
  opt.reps = 6;
  opt.estimators = {"naive", "plugin"};
  opt.seed = 21;
  opt.quiet = true;

  auto run_with_threads = [&](int threads, const std::string& path) {
    opt.threads = threads;
    opt.out = path;
    REQUIRE(cmd_simulate(opt) == 0);
    // strip the runtime column, the one field allowed to vary
    std::vector<std::string> rows;
    std::stringstream ss(slurp(path));
    std::string line;
    while (std::getline(ss, line)) rows.push_back(line.substr(0, line.rfind(',')));
    return rows;
  };
  TempFile a("cli_t1.csv"), a_cfg("cli_t1.csv.run.json");
  TempFile b("cli_t4.csv"), b_cfg("cli_t4.csv.run.json");
  CHECK(run_with_threads(1, a.path) == run_with_threads(4, b.path));
}

TEST_CASE("model evaluation recovers the serialized truth") {
  // shifted-gaussian data with shift 0.5 in one dimension
  SynthGenOptions gen;
  gen.design = "shifted-gaussian";
  gen.shift = 0.5;
  gen.n_de = 2000;
  gen.n_nu = 50;
  gen.seed = 9;
  gen.out = "cli_eval_data.csv";
  gen.emit_oracle = "cli_eval_oracle.json";
  gen.quiet = true;
  TempFile data(gen.out), data_cfg(gen.out + ".run.json"), oracle(gen.emit_oracle);
  REQUIRE(cmd_synth_gen(gen) == 0);

  // the truth exp(0.5 x - 0.125) is exactly representable: exp link, linear basis
  Eigen::VectorXd theta(2);
  theta << -0.125, 0.5;
  const RatioModel truth(BasisExpansion::polynomial(1, 1), Link::Exp, theta);
  TempFile model("cli_eval_truth.json");
  {
    std::ofstream out(model.path);
    out << truth.to_json().dump();
  }

  DreEvalOptions opt;
  opt.model_path = model.path;
  opt.data_path = data.path;
  opt.oracle_path = oracle.path;
  opt.out = "cli_eval_metrics.json";
  opt.quiet = true;
  TempFile metrics(opt.out);
  REQUIRE(cmd_dre_eval(opt) == 0);
  CHECK(read_json(opt.out).at("l2_error_de").get<double>() <= 1e-10);

  // a flat model misses by the analytic gap E_de[(r0 - 1)^2] = e^{m^2} - 1
  const RatioModel flat = testsup::constant_model(1, 1.0);
  TempFile flat_model("cli_eval_flat.json");
  {
    std::ofstream out(flat_model.path);
    out << flat.to_json().dump();
  }
  opt.model_path = flat_model.path;
  opt.out = "cli_eval_flat_metrics.json";
  TempFile flat_metrics(opt.out);
  REQUIRE(cmd_dre_eval(opt) == 0);
  const double l2 = read_json(opt.out).at("l2_error_de").get<double>();

  // monte carlo band: se of the per-point squared gap on the same sample
  const TwoSampleDataset ts = read_two_sample_csv(data.path);
  const GaussianShiftOracle shift_oracle(Eigen::VectorXd::Constant(1, 0.5));
  Eigen::VectorXd sq(ts.n_de());
  for (Eigen::Index i = 0; i < ts.n_de(); ++i) {
    const double g = shift_oracle.ratio(ts.de().row(i).transpose()) - 1.0;
    sq(i) = g * g;
  }
  const double n = static_cast<double>(ts.n_de());
  const double se = std::sqrt((sq.array() - sq.mean()).square().sum() / n) / std::sqrt(n);
  const double analytic = std::exp(0.25) - 1.0;
  CHECK(std::abs(l2 - analytic) <= 4.0 * se);

  // without an oracle the metrics stay purely empirical
  opt.oracle_path.clear();
  opt.out = "cli_eval_plain.json";
  TempFile plain(opt.out);
  REQUIRE(cmd_dre_eval(opt) == 0);
  CHECK_FALSE(read_json(opt.out).contains("l2_error_de"));
}

TEST_CASE("representer fit and effect estimate run through the command layer") {
  TempFile data("cli_obs.csv");
  {
    SynthGenOptions gen;
    gen.n = 400;
    gen.seed = 31;
    gen.out = data.path;
    gen.quiet = true;
    REQUIRE(cmd_synth_gen(gen) == 0);
  }
  TempFile data_cfg(data.path + ".run.json");

  RieszFitOptions riesz;
  riesz.data_path = data.path;
  riesz.objective = "riesz-ukl";
  riesz.model = "linear:poly:1";
  riesz.optimizer.max_iters = 150;
  riesz.out = "cli_heads.json";
  riesz.quiet = true;
  TempFile heads(riesz.out);
  REQUIRE(cmd_riesz_fit(riesz) == 0);
  const auto fitted = RieszModel::from_json(read_json(heads.path).at("model"));
  CHECK(fitted.head1().link() == Link::SoftplusShift);

  AteEstimateOptions ate;
  ate.data_path = data.path;
  ate.folds = 4;
  ate.optimizer.max_iters = 200;
  ate.out = "cli_report.json";
  ate.quiet = true;
  TempFile report(ate.out);
  REQUIRE(cmd_ate_estimate(ate) == 0);
  auto j = read_json(ate.out);
  CHECK(j.at("ci_low").get<double>() <= j.at("tau_hat").get<double>());
  CHECK(j.at("per_fold").size() == 4);

  ate.estimator = "ipw";
  REQUIRE(cmd_ate_estimate(ate) == 0);
  CHECK(read_json(ate.out).at("estimator").get<std::string>() == "ipw");
}

TEST_CASE("analytic kernel fits run with grid-selected regularization") {
  TempFile data("cli_kulsif.csv");
  {
    SynthGenOptions gen;
    gen.design = "shifted-gaussian";
    gen.shift = 0.5;
    gen.n_de = 40;
    gen.n_nu = 40;
    gen.seed = 33;
    gen.out = data.path;
    gen.quiet = true;
    REQUIRE(cmd_synth_gen(gen) == 0);
  }
  TempFile data_cfg(data.path + ".run.json");

  DreFitOptions fit;
  fit.data_path = data.path;
  fit.model = "kulsif:median:loocv-grid";
  fit.out = "cli_kulsif_model.json";
  fit.quiet = true;
  TempFile model(fit.out);
  REQUIRE(cmd_dre_fit(fit) == 0);
  const auto j = read_json(fit.out);
  CHECK(j.at("loocv_scores").size() == 5);
  CHECK(j.at("lambda").get<double>() > 0.0);

  // non-least-squares losses have no analytic solve
  fit.loss = "ukl";
  std::ostringstream sink;
  CHECK(run_guarded([&] { return cmd_dre_fit(fit); }, sink) == 1);
}

TEST_CASE("evaluation rejects dimension mismatches") {
  TempFile data("cli_dim.csv");
  {
    SynthGenOptions gen;
    gen.design = "shifted-gaussian";
    gen.dim = 2;
    gen.n_de = 20;
    gen.n_nu = 20;
    gen.out = data.path;
    gen.quiet = true;
    REQUIRE(cmd_synth_gen(gen) == 0);
  }
  TempFile data_cfg(data.path + ".run.json");
  TempFile model("cli_dim_model.json");
  {
    std::ofstream out(model.path);
    out << testsup::constant_model(1, 1.0).to_json().dump();  // 1-d model, 2-d data
  }
  DreEvalOptions opt;
  opt.model_path = model.path;
  opt.data_path = data.path;
  opt.out = "cli_dim_metrics.json";
  opt.quiet = true;
  std::ostringstream sink;
  CHECK(run_guarded([&] { return cmd_dre_eval(opt); }, sink) == 2);
}

TEST_CASE("a failed equivalence check exits with the numerical code") {
  EquivalenceOptions opt;
  opt.synthetic = true;
  opt.n = 100;
  opt.trials = 5;
  opt.tolerance = -1.0;  // unreachable, forces the failure branch
  opt.quiet = true;
  CHECK(cmd_equivalence_check(opt) == 3);
}

TEST_CASE("binary maps flags and failures onto the exit-code contract") {
  CHECK(run_cli("--help") == 0);
  CHECK(run_cli("definitely-not-a-subcommand") == 1);
  CHECK(run_cli("synth gen --no-such-flag 1 --out x.csv") == 1);
  CHECK(run_cli("equivalence-check --synthetic --n 150 --trials 10 --seed 2") == 0);
  CHECK(run_cli("dre fit --data missing.csv --out m.json") == 2);
}

TEST_CASE("config files feed flags and the command line wins") {
  TempFile cfg("cli_conf.ini");
  {
    std::ofstream out(cfg.path);
    out << "n=150\nseed=5\ntrials=7\nsynthetic=true\nout=cli_conf_report.json\n";
  }
  TempFile report("cli_conf_report.json");
  CHECK(run_cli("equivalence-check --config " + cfg.path + " --quiet") == 0);
  auto j = read_json(report.path);
  CHECK(j.at("config").at("seed").get<std::uint64_t>() == 5);
  CHECK(j.at("config").at("trials").get<int>() == 7);

  CHECK(run_cli("equivalence-check --config " + cfg.path + " --seed 11 --quiet") == 0);
  j = read_json(report.path);
  CHECK(j.at("config").at("seed").get<std::uint64_t>() == 11);
  CHECK(j.at("config").at("trials").get<int>() == 7);
}
