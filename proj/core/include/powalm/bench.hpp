#pragma once

// Experiment sweeps: (dims x seeds x solver grid) -> per-run CSV logs, a
// run manifest and median / P95 tables of cumulative inner iterations.

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "powalm/alm.hpp"
#include "powalm/problems.hpp"

namespace powalm {

struct SolverSpec {
  AlmMethod method = AlmMethod::PowerAlm;
  NormFamily norm = NormFamily::Euclidean;
  /// Dual exponent; the penalty is a (q+1)-th power. Ignored by the
  /// classical methods.
  double q = 1.0;
  /// Fixed penalty, or initial penalty for ClassicalAdaptive.
  double lambda = 0.1;
  double delta = 0.1;

  std::string label() const;
  /// Parses "method=power q=0.8 lambda=0.1 norm=euclidean delta=0.1".
  static SolverSpec parse(const std::string& text);
};

enum class ReferenceChoice { Auto, Kkt, Alm };

struct ExperimentConfig {
  Family family = Family::QpEqBox;
  std::vector<std::pair<Eigen::Index, Eigen::Index>> dims;  // (m, n)
  int seeds = 1;
  std::uint64_t base_seed = 0;
  std::vector<SolverSpec> solvers;
  double tol_f = 1e-6;
  double tol_r = 1e-6;
  int max_outer = 1000;
  long long max_inner = 2000000;
  int max_inner_per_solve = 100000;
  double l1_theta = 100.0;
  double lp_cond = 1000.0;
  ReferenceChoice reference = ReferenceChoice::Auto;
  std::string output_dir = "powalm_out";
  /// Write wall-clock seconds into elapsed_s (breaks byte-identical reruns).
  bool record_time = false;

  /// Throws std::invalid_argument on an empty grid, q outside (0, 1] or a
  /// non-positive penalty.
  void validate() const;
};

/// Flat "key = value" text; '#' starts a comment; "solver" may repeat.
ExperimentConfig parse_config(std::istream& in);
ExperimentConfig load_config(const std::string& path);
/// "50x100" -> (50, 100).
std::pair<Eigen::Index, Eigen::Index> parse_dims(const std::string& text);

struct RunOutcome {
  Eigen::Index m = 0;
  Eigen::Index n = 0;
  std::uint64_t seed = 0;
  std::string method;
  std::string status;
  bool converged = false;
  int outer_iters = 0;
  long long cum_inner = 0;
  double final_subopt = 0.0;
  double final_feas2 = 0.0;
  /// Relative to the output directory.
  std::string csv_path;
};

struct SummaryRow {
  Eigen::Index m = 0;
  Eigen::Index n = 0;
  std::string method;
  long long median_inner = 0;
  long long p95_inner = 0;
  int success = 0;
  int total = 0;
};

/// Lower median of a nonempty list.
long long lower_median(std::vector<long long> values);
/// Nearest-rank 95th percentile of a nonempty list.
long long p95_nearest_rank(std::vector<long long> values);

/// Rows ordered by first appearance of (m, n) and method in `runs`.
/// Statistics use converged runs only; a cell without any has success 0.
std::vector<SummaryRow> summarize(const std::vector<RunOutcome>& runs);

struct ExperimentResult {
  std::vector<RunOutcome> runs;
  std::vector<SummaryRow> summary;
};

struct RunOptions {
  int jobs = 1;
  std::ostream* progress = nullptr;
};

/// Generates every instance, computes its reference f*, runs every solver
/// and writes <out>/runs/*.csv, runs.csv, summary.csv, table_median.csv and
/// table_p95.csv. Per-run failures are recorded, never thrown.
ExperimentResult run_experiment(const ExperimentConfig& config, const RunOptions& options = {});

inline constexpr const char* kRunCsvHeader =
    "outer_iter,cum_inner,f_val,abs_subopt,feas2,feas_dual,pd_gap,implicit_penalty_min,"
    "implicit_penalty_max,elapsed_s";

void write_run_csv_header(std::ostream& out);
void write_run_csv_row(std::ostream& out, const IterationRecord& rec);

struct CsvRow {
  int outer_iter = 0;
  long long cum_inner = 0;
  double f_val = 0.0;
  std::optional<double> abs_subopt;
  double feas2 = 0.0;
  double feas_dual = 0.0;
  std::optional<double> pd_gap;
  double implicit_penalty_min = 0.0;
  double implicit_penalty_max = 0.0;
  double elapsed_s = 0.0;
};

/// Parses a per-run log; throws on a header mismatch.
std::vector<CsvRow> read_run_csv(std::istream& in);

void write_runs_manifest(std::ostream& out, const std::vector<RunOutcome>& runs);
std::vector<RunOutcome> read_runs_manifest(std::istream& in);
void write_summary_csv(std::ostream& out, const std::vector<SummaryRow>& rows);
/// Pivot with one row per (m, n) and one column per method; `p95` selects
/// the statistic. Cells without a converged run are left empty.
void write_table_csv(std::ostream& out, const std::vector<SummaryRow>& rows, bool p95);

}  // namespace powalm
