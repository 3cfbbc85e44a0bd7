#include "powalm/bench.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <thread>

namespace powalm {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(s);
  while (std::getline(in, item, sep)) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

std::string fmt_g(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}

std::string fmt_full(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string fmt_opt(const std::optional<double>& v) { return v ? fmt_full(*v) : std::string(); }

NormFamily parse_norm(const std::string& name) {
  if (name == "euclidean") return NormFamily::Euclidean;
  if (name == "power") return NormFamily::SeparablePower;
  throw std::invalid_argument("unknown norm family: " + name);
}

}  // namespace

std::string SolverSpec::label() const {
  switch (method) {
    case AlmMethod::PowerAlm:
      return "power_q" + fmt_g(q) + "_l" + fmt_g(lambda) + "_" + to_string(norm);
    case AlmMethod::ClassicalFixed:
      return "classical_fixed_l" + fmt_g(lambda);
    case AlmMethod::ClassicalAdaptive:
      return "classical_adaptive_l" + fmt_g(lambda) + "_d" + fmt_g(delta);
  }
  return "unknown";
}

SolverSpec SolverSpec::parse(const std::string& text) {
  SolverSpec spec;
  for (const auto& tok : split(text, ' ')) {
    const auto eq = tok.find('=');
    if (eq == std::string::npos) throw std::invalid_argument("solver field without '=': " + tok);
    const std::string key = tok.substr(0, eq);
    const std::string value = tok.substr(eq + 1);
    if (key == "method") spec.method = parse_method(value);
    else if (key == "q") spec.q = std::stod(value);
    else if (key == "lambda") spec.lambda = std::stod(value);
    else if (key == "delta") spec.delta = std::stod(value);
    else if (key == "norm") spec.norm = parse_norm(value);
    else throw std::invalid_argument("unknown solver field: " + key);
  }
  return spec;
}

void ExperimentConfig::validate() const {
  if (dims.empty()) throw std::invalid_argument("config: no dims");
  if (solvers.empty()) throw std::invalid_argument("config: empty solver grid");
  if (seeds < 1) throw std::invalid_argument("config: seeds must be >= 1");
  for (const auto& s : solvers) {
    if (!(s.q > 0.0 && s.q <= 1.0)) throw std::invalid_argument("config: q must lie in (0, 1]");
    if (!(s.lambda > 0.0)) throw std::invalid_argument("config: lambda must be positive");
    if (!(s.delta > 0.0 && s.delta < 1.0)) throw std::invalid_argument("config: delta in (0, 1)");
  }
}

std::pair<Eigen::Index, Eigen::Index> parse_dims(const std::string& text) {
  const auto x = text.find('x');
  if (x == std::string::npos) throw std::invalid_argument("dims must look like MxN: " + text);
  return {std::stol(text.substr(0, x)), std::stol(text.substr(x + 1))};
}

ExperimentConfig parse_config(std::istream& in) {
  ExperimentConfig cfg;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw std::invalid_argument("config line " + std::to_string(lineno) + ": expected key = value");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key == "family") cfg.family = parse_family(value);
    else if (key == "dims") {
      cfg.dims.clear();
      for (const auto& d : split(value, ',')) cfg.dims.push_back(parse_dims(d));
    } else if (key == "seeds") cfg.seeds = std::stoi(value);
    else if (key == "base_seed") cfg.base_seed = std::stoull(value);
    else if (key == "solver") cfg.solvers.push_back(SolverSpec::parse(value));
    else if (key == "tol_f") cfg.tol_f = std::stod(value);
    else if (key == "tol_r") cfg.tol_r = std::stod(value);
    else if (key == "max_outer") cfg.max_outer = std::stoi(value);
    else if (key == "max_inner") cfg.max_inner = std::stoll(value);
    else if (key == "max_inner_per_solve") cfg.max_inner_per_solve = std::stoi(value);
    else if (key == "theta") cfg.l1_theta = std::stod(value);
    else if (key == "cond") cfg.lp_cond = std::stod(value);
    else if (key == "output") cfg.output_dir = value;
    else if (key == "record_time") cfg.record_time = value == "true" || value == "1";
    else if (key == "reference") {
      if (value == "auto") cfg.reference = ReferenceChoice::Auto;
      else if (value == "kkt") cfg.reference = ReferenceChoice::Kkt;
      else if (value == "alm") cfg.reference = ReferenceChoice::Alm;
      else throw std::invalid_argument("unknown reference mode: " + value);
    } else {
      throw std::invalid_argument("config line " + std::to_string(lineno) + ": unknown key " + key);
    }
  }
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config " + path);
  return parse_config(in);
}

long long lower_median(std::vector<long long> values) {
  if (values.empty()) throw std::invalid_argument("lower_median: empty list");
  std::sort(values.begin(), values.end());
  return values[(values.size() - 1) / 2];
}

long long p95_nearest_rank(std::vector<long long> values) {
  if (values.empty()) throw std::invalid_argument("p95_nearest_rank: empty list");
  std::sort(values.begin(), values.end());
  // Integer form of ceil(0.95 n) avoids 0.95 * 20 = 19.000000000000004.
  const std::size_t rank = (95 * values.size() + 99) / 100;
  return values[std::max<std::size_t>(rank, 1) - 1];
}

std::vector<SummaryRow> summarize(const std::vector<RunOutcome>& runs) {
  std::vector<SummaryRow> rows;
  std::vector<std::vector<long long>> samples;
  for (const auto& r : runs) {
    auto it = std::find_if(rows.begin(), rows.end(), [&](const SummaryRow& row) {
      return row.m == r.m && row.n == r.n && row.method == r.method;
    });
    if (it == rows.end()) {
      rows.push_back({r.m, r.n, r.method, 0, 0, 0, 0});
      samples.emplace_back();
      it = rows.end() - 1;
    }
    const auto idx = static_cast<std::size_t>(it - rows.begin());
    ++it->total;
    if (r.converged) {
      ++it->success;
      samples[idx].push_back(r.cum_inner);
    }
  }
  // Group rows by dims in order of first appearance, keeping method order.
  std::vector<std::size_t> order(rows.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::vector<std::pair<Eigen::Index, Eigen::Index>> dims_order;
  for (const auto& row : rows) {
    if (std::find(dims_order.begin(), dims_order.end(), std::make_pair(row.m, row.n)) ==
        dims_order.end()) {
      dims_order.emplace_back(row.m, row.n);
    }
  }
  auto dims_rank = [&](std::size_t i) {
    return std::find(dims_order.begin(), dims_order.end(), std::make_pair(rows[i].m, rows[i].n)) -
           dims_order.begin();
  };
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return dims_rank(a) < dims_rank(b); });
  std::vector<SummaryRow> out;
  for (std::size_t i : order) {
    SummaryRow row = rows[i];
    if (!samples[i].empty()) {
      row.median_inner = lower_median(samples[i]);
      row.p95_inner = p95_nearest_rank(samples[i]);
    }
    out.push_back(row);
  }
  return out;
}

void write_run_csv_header(std::ostream& out) { out << kRunCsvHeader << '\n'; }

void write_run_csv_row(std::ostream& out, const IterationRecord& rec) {
  out << rec.outer_iter << ',' << rec.cum_inner << ',' << fmt_full(rec.f_val) << ','
      << fmt_opt(rec.abs_subopt) << ',' << fmt_full(rec.feas2) << ',' << fmt_full(rec.feas_dual)
      << ',' << fmt_opt(rec.pd_gap) << ',' << fmt_full(rec.penalty_min) << ','
      << fmt_full(rec.penalty_max) << ',' << fmt_full(rec.elapsed_s) << '\n';
}

namespace {

std::vector<std::string> split_keep_empty(const std::string& s) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(s);
  while (std::getline(in, item, ',')) out.push_back(item);
  if (!s.empty() && s.back() == ',') out.emplace_back();
  return out;
}

std::optional<double> parse_opt(const std::string& s) {
  if (s.empty()) return std::nullopt;
  return std::strtod(s.c_str(), nullptr);
}

}  // namespace

std::vector<CsvRow> read_run_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != kRunCsvHeader) {
    throw std::runtime_error("run CSV: unexpected header");
  }
  std::vector<CsvRow> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto f = split_keep_empty(line);
    if (f.size() != 10) throw std::runtime_error("run CSV: expected 10 fields");
    CsvRow r;
    r.outer_iter = std::stoi(f[0]);
    r.cum_inner = std::stoll(f[1]);
    r.f_val = std::strtod(f[2].c_str(), nullptr);
    r.abs_subopt = parse_opt(f[3]);
    r.feas2 = std::strtod(f[4].c_str(), nullptr);
    r.feas_dual = std::strtod(f[5].c_str(), nullptr);
    r.pd_gap = parse_opt(f[6]);
    r.implicit_penalty_min = std::strtod(f[7].c_str(), nullptr);
    r.implicit_penalty_max = std::strtod(f[8].c_str(), nullptr);
    r.elapsed_s = std::strtod(f[9].c_str(), nullptr);
    rows.push_back(r);
  }
  return rows;
}

void write_runs_manifest(std::ostream& out, const std::vector<RunOutcome>& runs) {
  out << "m,n,seed,method,status,converged,outer_iters,cum_inner,final_subopt,final_feas2,csv\n";
  for (const auto& r : runs) {
    out << r.m << ',' << r.n << ',' << r.seed << ',' << r.method << ',' << r.status << ','
        << (r.converged ? 1 : 0) << ',' << r.outer_iters << ',' << r.cum_inner << ','
        << fmt_full(r.final_subopt) << ',' << fmt_full(r.final_feas2) << ',' << r.csv_path << '\n';
  }
}

std::vector<RunOutcome> read_runs_manifest(std::istream& in) {
  std::string line;
  std::getline(in, line);
  std::vector<RunOutcome> runs;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto f = split_keep_empty(line);
    if (f.size() != 11) throw std::runtime_error("runs manifest: expected 11 fields");
    RunOutcome r;
    r.m = std::stol(f[0]);
    r.n = std::stol(f[1]);
    r.seed = std::stoull(f[2]);
    r.method = f[3];
    r.status = f[4];
    r.converged = f[5] == "1";
    r.outer_iters = std::stoi(f[6]);
    r.cum_inner = std::stoll(f[7]);
    r.final_subopt = std::strtod(f[8].c_str(), nullptr);
    r.final_feas2 = std::strtod(f[9].c_str(), nullptr);
    r.csv_path = f[10];
    runs.push_back(r);
  }
  return runs;
}

void write_summary_csv(std::ostream& out, const std::vector<SummaryRow>& rows) {
  out << "m,n,method,median_inner,p95_inner,success,total\n";
  for (const auto& r : rows) {
    out << r.m << ',' << r.n << ',' << r.method << ',';
    if (r.success > 0) out << r.median_inner << ',' << r.p95_inner;
    else out << ',';
    out << ',' << r.success << ',' << r.total << '\n';
  }
}

void write_table_csv(std::ostream& out, const std::vector<SummaryRow>& rows, bool p95) {
  std::vector<std::string> methods;
  std::vector<std::pair<Eigen::Index, Eigen::Index>> dims;
  for (const auto& r : rows) {
    if (std::find(methods.begin(), methods.end(), r.method) == methods.end()) {
      methods.push_back(r.method);
    }
    if (std::find(dims.begin(), dims.end(), std::make_pair(r.m, r.n)) == dims.end()) {
      dims.emplace_back(r.m, r.n);
    }
  }
  out << "m,n";
  for (const auto& m : methods) out << ',' << m;
  out << '\n';
  for (const auto& [m, n] : dims) {
    out << m << ',' << n;
    for (const auto& method : methods) {
      out << ',';
      for (const auto& r : rows) {
        if (r.m == m && r.n == n && r.method == method && r.success > 0) {
          out << (p95 ? r.p95_inner : r.median_inner);
        }
      }
    }
    out << '\n';
  }
}

namespace {

ProblemInstance generate(const ExperimentConfig& cfg, Eigen::Index m, Eigen::Index n,
                         std::uint64_t seed) {
  switch (cfg.family) {
    case Family::LP: return gen_lp(m, n, cfg.lp_cond, seed);
    case Family::QpEqBox: return gen_qp_eq_box(m, n, seed);
    case Family::QpIneq: return gen_qp_ineq(m, n, seed);
    case Family::L1Reg: return gen_l1_regression(m, n, cfg.l1_theta, seed);
  }
  throw std::logic_error("unhandled family");
}

ReferenceMode reference_mode(const ExperimentConfig& cfg) {
  switch (cfg.reference) {
    case ReferenceChoice::Kkt: return ReferenceMode::KktDirect;
    case ReferenceChoice::Alm: return ReferenceMode::HighAccuracyAlm;
    case ReferenceChoice::Auto:
      return cfg.family == Family::QpEqBox || cfg.family == Family::LP
                 ? ReferenceMode::KktDirect
                 : ReferenceMode::HighAccuracyAlm;
  }
  return ReferenceMode::HighAccuracyAlm;
}

std::string run_file_name(const ExperimentConfig& cfg, Eigen::Index m, Eigen::Index n,
                          std::uint64_t seed, const std::string& label) {
  return std::string(to_string(cfg.family)) + "_m" + std::to_string(m) + "_n" + std::to_string(n) +
         "_s" + std::to_string(seed) + "_" + label + ".csv";
}

struct InstanceTask {
  Eigen::Index m;
  Eigen::Index n;
  std::uint64_t seed;
  std::size_t first_slot;
};

void run_instance(const ExperimentConfig& cfg, const InstanceTask& task,
                  const std::filesystem::path& run_dir, std::vector<RunOutcome>& slots) {
  std::optional<ProblemInstance> problem;
  try {
    problem = generate(cfg, task.m, task.n, task.seed);
    reference_solution(*problem, reference_mode(cfg));
  } catch (const std::exception&) {
    problem.reset();
  }

  for (std::size_t j = 0; j < cfg.solvers.size(); ++j) {
    const SolverSpec& spec = cfg.solvers[j];
    RunOutcome& out = slots[task.first_slot + j];
    out.m = task.m;
    out.n = task.n;
    out.seed = task.seed;
    out.method = spec.label();
    const std::string file = run_file_name(cfg, task.m, task.n, task.seed, out.method);
    out.csv_path = "runs/" + file;
    std::ofstream csv(run_dir / file, std::ios::binary);
    write_run_csv_header(csv);
    if (!problem) {
      out.status = "generation_error";
      continue;
    }
    try {
      OuterConfig oc;
      oc.method = spec.method;
      oc.max_outer = cfg.max_outer;
      oc.max_inner_total = cfg.max_inner;
      oc.tol_f = cfg.tol_f;
      oc.tol_r = cfg.tol_r;
      oc.delta = spec.delta;
      oc.record_time = cfg.record_time;
      oc.inner.max_iter = cfg.max_inner_per_solve;
      const PowerParams params = PowerParams::from_dual_power(spec.q, spec.lambda, spec.norm);
      const RunLog log = run_power_alm(*problem, params, oc, [&](const IterationRecord& rec) {
        write_run_csv_row(csv, rec);
        csv.flush();
      });
      out.status = to_string(log.status);
      out.converged = log.converged();
      out.outer_iters = static_cast<int>(log.records.size());
      out.cum_inner = log.cum_inner;
      if (!log.records.empty()) {
        out.final_subopt = log.records.back().abs_subopt.value_or(0.0);
        out.final_feas2 = log.records.back().feas2;
      }
    } catch (const std::exception&) {
      out.status = "error";
    }
  }
}

}  // namespace

ExperimentResult run_experiment(const ExperimentConfig& cfg, const RunOptions& options) {
  cfg.validate();
  namespace fs = std::filesystem;
  const fs::path out_dir(cfg.output_dir);
  const fs::path run_dir = out_dir / "runs";
  fs::create_directories(run_dir);

  std::vector<InstanceTask> tasks;
  std::size_t slot = 0;
  for (const auto& [m, n] : cfg.dims) {
    for (int s = 0; s < cfg.seeds; ++s) {
      tasks.push_back({m, n, cfg.base_seed + static_cast<std::uint64_t>(s), slot});
      slot += cfg.solvers.size();
    }
  }
  ExperimentResult result;
  result.runs.resize(slot);

  std::atomic<std::size_t> next{0};
  std::mutex progress_mutex;
  auto worker = [&] {
    for (std::size_t i = next++; i < tasks.size(); i = next++) {
      run_instance(cfg, tasks[i], run_dir, result.runs);
      if (options.progress) {
        std::lock_guard<std::mutex> lock(progress_mutex);
        *options.progress << "instance m=" << tasks[i].m << " n=" << tasks[i].n
                          << " seed=" << tasks[i].seed << " done\n";
      }
    }
  };
  const int jobs = std::max(1, options.jobs);
  if (jobs == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int j = 0; j < jobs; ++j) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }

  result.summary = summarize(result.runs);
  std::ofstream manifest(out_dir / "runs.csv", std::ios::binary);
  write_runs_manifest(manifest, result.runs);
  std::ofstream summary(out_dir / "summary.csv", std::ios::binary);
  write_summary_csv(summary, result.summary);
  std::ofstream median(out_dir / "table_median.csv", std::ios::binary);
  write_table_csv(median, result.summary, false);
  std::ofstream p95(out_dir / "table_p95.csv", std::ios::binary);
  write_table_csv(p95, result.summary, true);
  return result;
}

}  // namespace powalm
