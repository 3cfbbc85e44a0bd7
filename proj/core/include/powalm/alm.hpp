#pragma once

// Power augmented Lagrangian method for min f(x) + g(Ax - b):
//
//   L_lambda(x, y) = sup_{eta in C} f(x) + <Ax - b, eta> - (lambda * phi)(y - eta)
//
// with C the dual set of the constraint kind. The maximizer eta* is the next
// multiplier, so one outer step is an approximate minimization in x followed
// by y <- eta*(x, w).

#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "powalm/constraint_kind.hpp"
#include "powalm/inner.hpp"
#include "powalm/power.hpp"
#include "powalm/problems.hpp"
#include "powalm/proxpoint.hpp"

namespace powalm {

/// argmax_{eta in C} <s, eta> - (lambda * phi)(y - eta). For the Euclidean
/// norm with a clipped dual set this reduces to a scalar fixed point in
/// t = ||y - eta||^{p-1}, solved by safeguarded Newton in log t.
Vector multiplier_argmax(const Vector& s, const Vector& y, const PowerParams& params,
                         ConstraintKind kind);

/// Textbook multiplier step clip_C(y + lambda s).
Vector classical_multiplier(const Vector& s, const Vector& y, double lambda, ConstraintKind kind);

double aug_lagrangian_value(const Vector& x, const Vector& y, const ProblemInstance& problem,
                            const PowerParams& params);
Vector aug_lagrangian_grad_x(const Vector& x, const Vector& y, const ProblemInstance& problem,
                             const PowerParams& params);
/// Value and gradient in one pass; `grad` may be null.
double aug_lagrangian(const Vector& x, const Vector& y, const ProblemInstance& problem,
                      const PowerParams& params, Vector* grad);
/// Quadratic-penalty augmented Lagrangian f + <s, eta> - ||y - eta||^2 / (2 lambda).
double classical_aug_lagrangian(const Vector& x, const Vector& y, const ProblemInstance& problem,
                                double lambda, Vector* grad);

Vector dual_update(const Vector& x_next, const Vector& w, const ProblemInstance& problem,
                   const PowerParams& params);

/// 2 lambda_k when r_next >= delta r_k, unless both residuals are already
/// at most tol_r.
double baseline_adaptive_penalty(double lambda_k, double r_next, double r_k, double delta,
                                 double tol_r = 0.0);

/// Penalty of the classical step that reproduces the power step:
/// lambda^p ||y_next - y||^{1-p} (Euclidean) or the same per coordinate
/// (SeparablePower). Zero steps give +infinity for p > 1.
Vector implicit_penalty(const Vector& y_next, const Vector& y, const PowerParams& params);

/// Weighted running mean with weights a_k = k^{p+1} - (k-1)^{p+1}.
class ErgodicAverager {
 public:
  explicit ErgodicAverager(double p) : p_(p) {}
  void add(const Vector& x);
  const Vector& mean() const { return mean_; }
  int count() const { return count_; }
  /// Sum of the weights seen so far; equals count^{p+1} up to roundoff.
  double weight_sum() const { return weight_sum_; }

 private:
  double p_;
  int count_ = 0;
  double weight_sum_ = 0.0;
  Vector mean_;
};

Vector ergodic_average(const std::vector<Vector>& xs, double p);

struct GapResult {
  double gap;
  /// The dual value is not a certified lower bound (surrogate used), or y
  /// had to be projected onto the dual set.
  bool flagged;
};

/// Primal objective at x minus the dual value at y.
GapResult primal_dual_gap(const Vector& x, const Vector& y, const ProblemInstance& problem);

/// eps = grad_norm * D, the accuracy certified by a small inner gradient on
/// a bounded domain. Empty for unbounded or non-finite D.
std::optional<double> accuracy_from_gradient(double inner_grad_norm, double diameter);

enum class StoppingMode { GradOverDiameter, Practical };

struct StoppingRule {
  StoppingMode mode = StoppingMode::Practical;
  /// Numerator of the threshold: 1e-3 in Practical mode, the eps constant
  /// in GradOverDiameter mode.
  double c = 1e-3;
  double diameter = 1.0;
  /// Lower clamp on the threshold.
  double floor = 0.0;

  /// Inner tolerance at 0-based outer index k. Practical: c / (k+1)^{p+1},
  /// i.e. the first outer step uses k = 1. GradOverDiameter: eps_k / D with
  /// eps_k = c / (k+1)^{p+1}.
  double threshold(int k, double p) const;
};

enum class AlmMethod { PowerAlm, ClassicalFixed, ClassicalAdaptive };

const char* to_string(AlmMethod method);
AlmMethod parse_method(const std::string& name);

enum class InnerEngine { Auto, Lbfgs, Apg };

struct InnerSolveOptions {
  InnerEngine engine = InnerEngine::Auto;
  int max_iter = 100000;
  int lbfgs_memory = 20;
  bool apg_restart = true;
};

struct OuterConfig {
  AlmMethod method = AlmMethod::PowerAlm;
  ThetaMode theta = ThetaMode::Plain;
  StoppingRule rule;
  int max_outer = 1000;
  long long max_inner_total = 2000000;
  double tol_f = 1e-6;
  double tol_r = 1e-6;
  /// Used instead of tol_f when f* is unknown: stop once the multiplier
  /// step norm is below this.
  double tol_step = 1e-6;
  /// Baseline sufficient-decrease factor.
  double delta = 0.1;
  InnerSolveOptions inner;
  /// Keep x^k, y^k and the ergodic mean in every record.
  bool keep_iterates = false;
  /// Fill elapsed_s with wall-clock time; otherwise it stays 0 so logs are
  /// reproducible byte for byte.
  bool record_time = false;
  /// Evaluate the primal-dual gap every iteration.
  bool compute_gap = true;
};

struct IterationRecord {
  int outer_iter = 0;
  long long cum_inner = 0;
  int inner_iterations = 0;
  double inner_stationarity = 0.0;
  double f_val = 0.0;
  std::optional<double> abs_subopt;
  /// 2-norm and dual norm of the constraint residual.
  double feas2 = 0.0;
  double feas_dual = 0.0;
  std::optional<double> pd_gap;
  bool gap_flagged = false;
  double penalty_min = 0.0;
  double penalty_max = 0.0;
  /// Penalty parameter used for this step (classical methods) or lambda.
  double lambda = 0.0;
  double step_norm = 0.0;
  double elapsed_s = 0.0;
  double ergodic_feas_dual = 0.0;
  double ergodic_f = 0.0;
  Vector x;
  Vector y;
  Vector w;
  Vector x_ergodic;
};

enum class RunStatus { Converged, OuterBudget, InnerBudget, InnerFailure };

const char* to_string(RunStatus status);

struct RunLog {
  std::vector<IterationRecord> records;
  RunStatus status = RunStatus::OuterBudget;
  long long cum_inner = 0;
  Vector x;
  Vector y;
  Vector x_ergodic;
  std::string message;

  bool converged() const { return status == RunStatus::Converged; }
};

using RecordSink = std::function<void(const IterationRecord&)>;

/// Outer loop. For ClassicalFixed/ClassicalAdaptive `params.lambda()` is the
/// (initial) penalty and the power is ignored.
RunLog run_power_alm(const ProblemInstance& problem, const PowerParams& params,
                     const OuterConfig& config, const RecordSink& sink = {});

}  // namespace powalm
