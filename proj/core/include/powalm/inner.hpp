#pragma once

// Minimization engines for the augmented Lagrangian subproblems.
//
//  * lbfgs_minimize: limited-memory BFGS with the two-loop recursion and a
//    weak Wolfe bracketing line search, for smooth unconstrained problems.
//  * adaptive_apg_minimize: accelerated proximal gradient with backtracking
//    on the local quadratic upper model. No global Lipschitz constant is
//    needed, so objectives with Hoelder continuous gradients are handled.

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace powalm {

using Vector = Eigen::VectorXd;

struct SmoothOracle {
  /// Returns f(x) and, when `grad` is non-null, writes the gradient into it.
  std::function<double(const Vector& x, Vector* grad)> evaluate;
  Eigen::Index dimension = 0;

  double value(const Vector& x) const { return evaluate(x, nullptr); }
  Vector gradient(const Vector& x) const;
};

/// Axis-aligned box [lower, upper].
struct Box {
  Vector lower;
  Vector upper;

  Vector project(const Vector& x) const;
  bool contains(const Vector& x, double tol = 0.0) const;
  /// Largest distance between two points of the box in the 2-norm.
  double diameter() const;
};

struct CompositeOracle {
  SmoothOracle smooth;
  /// Simple part: indicator of the box, or nothing.
  std::optional<Box> box;

  Vector prox(const Vector& x) const { return box ? box->project(x) : x; }
};

enum class InnerStatus { Converged, BudgetExhausted, LineSearchFailed, NumericalFailure };

const char* to_string(InnerStatus status);

struct InnerReport {
  Vector x;
  double value = 0.0;
  int iterations = 0;
  /// Gradient norm (L-BFGS) or scaled prox-gradient residual norm (APG) at x.
  double stationarity = 0.0;
  InnerStatus status = InnerStatus::BudgetExhausted;
  /// APG only: the model constant M used for the reported residual.
  double model_constant = 0.0;

  bool ok() const { return status == InnerStatus::Converged; }
};

struct LbfgsOptions {
  double tol_grad = 1e-8;
  int max_iter = 10000;
  int memory = 20;
  double c1 = 1e-4;
  double c2 = 0.9;
  int max_line_search = 60;
};

InnerReport lbfgs_minimize(const SmoothOracle& oracle, const Vector& x0,
                           const LbfgsOptions& options = {});

/// One accepted APG step, kept for post-hoc verification of the backtracking.
struct ApgStep {
  double model_constant;
  Vector point;
  Vector next;
};

struct ApgProgress {
  int iteration;
  const Vector& x;
  double residual;
};

struct ApgOptions {
  /// Stop when M ||x - prox(x - grad f(x) / M)|| <= tol.
  double tol = 1e-8;
  int max_iter = 100000;
  double initial_model_constant = 1.0;
  /// Optional alternative stopping test; returning true stops with Converged.
  std::function<bool(const ApgProgress&)> stop;
  /// Momentum restart when the step direction turns against the momentum.
  bool adaptive_restart = true;
  /// Collect every accepted (M, point, next) triple.
  std::vector<ApgStep>* trace = nullptr;
};

InnerReport adaptive_apg_minimize(const CompositeOracle& oracle, const Vector& x0,
                                  const ApgOptions& options = {});

/// M ||x - prox(x - g / M)||_2 for the given gradient g at x.
double prox_gradient_residual(const CompositeOracle& oracle, const Vector& x, const Vector& grad,
                              double model_constant);

/// The local upper-model inequality checked by the APG backtracking:
/// f(next) <= f(point) + <grad f(point), next - point> + M/2 ||next - point||^2.
/// When f(next) and f(point) agree to 1e-10 relative the value difference is
/// mostly roundoff, and <grad f(next) - grad f(point), d> <= M ||d||^2 is
/// tested instead.
bool descent_inequality_holds(double f_point, const Vector& grad_point, const Vector& point,
                              double f_next, const Vector& grad_next, const Vector& next,
                              double model_constant);

}  // namespace powalm
