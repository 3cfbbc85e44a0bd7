// powalm: run solver sweeps, re-summarize run logs, dump generated instances.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "powalm/bench.hpp"

namespace {

struct RunArgs {
  std::string config;
  std::string family;
  std::vector<std::string> mn;
  int seeds = 0;
  std::vector<std::string> methods;
  std::vector<double> qs;
  std::vector<double> lambdas;
  std::string norm;
  std::string out;
  int jobs = 1;
  bool quiet = false;
};

// Any of --method/--q/--lambda/--norm replaces the configured solver grid by
// the product method x q x lambda. q only multiplies the power method.
void apply_grid_overrides(const RunArgs& a, powalm::ExperimentConfig& cfg) {
  if (a.methods.empty() && a.qs.empty() && a.lambdas.empty() && a.norm.empty()) return;
  const std::vector<std::string> methods =
      a.methods.empty() ? std::vector<std::string>{"power"} : a.methods;
  const std::vector<double> qs = a.qs.empty() ? std::vector<double>{1.0} : a.qs;
  const std::vector<double> lambdas = a.lambdas.empty() ? std::vector<double>{0.1} : a.lambdas;
  cfg.solvers.clear();
  for (const auto& name : methods) {
    const powalm::AlmMethod method = powalm::parse_method(name);
    for (double lambda : lambdas) {
      if (method != powalm::AlmMethod::PowerAlm) {
        powalm::SolverSpec s;
        s.method = method;
        s.q = 1.0;
        s.lambda = lambda;
        cfg.solvers.push_back(s);
        continue;
      }
      for (double q : qs) {
        powalm::SolverSpec s;
        s.method = method;
        s.q = q;
        s.lambda = lambda;
        if (!a.norm.empty()) s.norm = a.norm == "power" ? powalm::NormFamily::SeparablePower
                                                        : powalm::NormFamily::Euclidean;
        cfg.solvers.push_back(s);
      }
    }
  }
}

int cmd_run(const RunArgs& a) {
  powalm::ExperimentConfig cfg;
  if (!a.config.empty()) cfg = powalm::load_config(a.config);
  if (!a.family.empty()) cfg.family = powalm::parse_family(a.family);
  if (!a.mn.empty()) {
    cfg.dims.clear();
    for (const auto& d : a.mn) cfg.dims.push_back(powalm::parse_dims(d));
  }
  if (a.seeds > 0) cfg.seeds = a.seeds;
  apply_grid_overrides(a, cfg);
  if (const char* env = std::getenv("POWALM_OUT_DIR"); env && *env) cfg.output_dir = env;
  if (!a.out.empty()) cfg.output_dir = a.out;

  powalm::RunOptions opts;
  opts.jobs = a.jobs;
  if (!a.quiet) opts.progress = &std::cerr;
  const powalm::ExperimentResult result = powalm::run_experiment(cfg, opts);

  int converged = 0;
  for (const auto& r : result.runs) converged += r.converged ? 1 : 0;
  std::cout << result.runs.size() << " runs, " << converged << " converged; output in "
            << cfg.output_dir << "\n";
  powalm::write_summary_csv(std::cout, result.summary);
  return 0;
}

int cmd_summarize(const std::string& dir) {
  namespace fs = std::filesystem;
  std::ifstream in(fs::path(dir) / "runs.csv");
  if (!in) {
    std::cerr << "cannot open " << (fs::path(dir) / "runs.csv").string() << "\n";
    return 1;
  }
  const auto runs = powalm::read_runs_manifest(in);
  const auto rows = powalm::summarize(runs);
  std::ofstream summary(fs::path(dir) / "summary.csv", std::ios::binary);
  powalm::write_summary_csv(summary, rows);
  std::ofstream median(fs::path(dir) / "table_median.csv", std::ios::binary);
  powalm::write_table_csv(median, rows, false);
  std::ofstream p95(fs::path(dir) / "table_p95.csv", std::ios::binary);
  powalm::write_table_csv(p95, rows, true);
  powalm::write_summary_csv(std::cout, rows);
  return 0;
}

int cmd_generate(const std::string& family, const std::string& mn, std::uint64_t seed,
                 double theta, double cond, const std::string& out) {
  const auto [m, n] = powalm::parse_dims(mn);
  powalm::ProblemInstance p;
  switch (powalm::parse_family(family)) {
    case powalm::Family::LP: p = powalm::gen_lp(m, n, cond, seed); break;
    case powalm::Family::QpEqBox: p = powalm::gen_qp_eq_box(m, n, seed); break;
    case powalm::Family::QpIneq: p = powalm::gen_qp_ineq(m, n, seed); break;
    case powalm::Family::L1Reg: p = powalm::gen_l1_regression(m, n, theta, seed); break;
  }
  if (out.empty() || out == "-") {
    powalm::write_instance(std::cout, p);
  } else {
    std::ofstream f(out, std::ios::binary);
    powalm::write_instance(f, p);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Power augmented Lagrangian experiments"};
  app.require_subcommand(1);

  RunArgs run;
  CLI::App* run_cmd = app.add_subcommand("run", "Run a sweep and write CSV logs and tables");
  run_cmd->add_option("config", run.config, "Experiment config file")->check(CLI::ExistingFile);
  run_cmd->add_option("--family", run.family, "lp, qp_eq_box, qp_ineq or l1_reg");
  run_cmd->add_option("--mn", run.mn, "Problem sizes, e.g. 50x100")->delimiter(',');
  run_cmd->add_option("--seeds", run.seeds, "Number of seeds");
  run_cmd->add_option("--method", run.methods, "power, classical_fixed, classical_adaptive")
      ->delimiter(',');
  run_cmd->add_option("--q", run.qs, "Dual exponents for the power method")->delimiter(',');
  run_cmd->add_option("--lambda", run.lambdas, "Penalties (initial penalty when adaptive)")
      ->delimiter(',');
  run_cmd->add_option("--norm", run.norm, "euclidean or power")
      ->check(CLI::IsMember({"euclidean", "power"}));
  run_cmd->add_option("--out", run.out, "Output directory (overrides POWALM_OUT_DIR)");
  run_cmd->add_option("-j,--jobs", run.jobs, "Worker threads")->check(CLI::PositiveNumber);
  run_cmd->add_flag("--quiet", run.quiet, "No progress on stderr");

  std::string sum_dir;
  CLI::App* sum_cmd = app.add_subcommand("summarize", "Rebuild summary tables from runs.csv");
  sum_cmd->add_option("dir", sum_dir, "Output directory of a previous run")->required();

  std::string gen_family = "qp_eq_box";
  std::string gen_mn = "6x12";
  std::uint64_t gen_seed = 0;
  double gen_theta = 100.0;
  double gen_cond = 1000.0;
  std::string gen_out;
  CLI::App* gen_cmd = app.add_subcommand("generate", "Write a generated instance snapshot");
  gen_cmd->add_option("--family", gen_family);
  gen_cmd->add_option("--mn", gen_mn);
  gen_cmd->add_option("--seed", gen_seed);
  gen_cmd->add_option("--theta", gen_theta, "l1_reg regularization weight");
  gen_cmd->add_option("--cond", gen_cond, "lp condition number");
  gen_cmd->add_option("-o,--output", gen_out, "File to write, default stdout");

  CLI11_PARSE(app, argc, argv);
  try {
    if (*run_cmd) return cmd_run(run);
    if (*sum_cmd) return cmd_summarize(sum_dir);
    if (*gen_cmd) return cmd_generate(gen_family, gen_mn, gen_seed, gen_theta, gen_cond, gen_out);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
