#pragma once

// Inexact power proximal point method over a convex objective psi:
//
//   w^k     = theta_k y^k + (1 - theta_k) y^0
//   y^{k+1} ~ argmin psi(eta) + (lambda * phi)(w^k - eta)
//
// plus the anisotropic Moreau envelope that serves as merit function when
// psi is extended-valued.

#include <functional>
#include <optional>
#include <vector>

#include "powalm/inner.hpp"
#include "powalm/power.hpp"

namespace powalm {

struct ConvexOracle {
  /// psi(y); +infinity outside the domain.
  std::function<double(const Vector&)> value;
  /// Any element of the subdifferential. Used as a gradient by the generic
  /// inner solve, so it must be a gradient when no exact prox is supplied.
  std::function<Vector(const Vector&)> subgradient;
  /// Closed-form argmin_eta psi(eta) + (lambda * phi)(w - eta), if known.
  std::function<Vector(const Vector& w, const PowerParams&)> exact_prox;
};

enum class ThetaMode { Averaging, Plain };
enum class EpsMode { Absolute, Relative };

struct EpsSchedule {
  EpsMode mode = EpsMode::Absolute;
  double c = 0.0;
  /// Exponent of the step-length factor in Relative mode.
  double t = 1.0;
};

/// k^{p+1} / (k+1)^{p+1} for Averaging, 1 for Plain.
double theta(int k, double p, ThetaMode mode);
Vector anchor(const Vector& yk, const Vector& y0, double theta_k);
/// c / (k+1)^{p+1}. In Relative mode this is the base value; the caller
/// multiplies by min{1, ||y^{k+1} - y^k||^t}.
double eps(int k, double p, const EpsSchedule& schedule);

/// Worst-case suboptimality after k steps for a run started at distance
/// `diameter` from a minimizer: (lambda^{-p} (p+1)^p D^{p+1} + c) / k^p.
double ppm_rate_bound(int k, const PowerParams& params, double diameter, double c);
/// Same for the envelope gap of an eps-proximal sequence, with the constant
/// (p^2+p)^p in place of (p+1)^p.
double envelope_rate_bound(int k, const PowerParams& params, double diameter, double c);

struct PpmCertificate {
  /// grad phi(lambda^{-1} (w - y_next)).
  Vector v;
  /// Stationarity of the inner problem at y_next (2-norm), 0 for exact prox.
  double inner_stationarity = 0.0;
  /// Upper bound on (lambda * phi)(y_next - true prox) implied by the
  /// stationarity, 0 for exact prox.
  double prox_distance_bound = 0.0;
  int inner_iterations = 0;
  InnerStatus status = InnerStatus::Converged;
  bool exact = false;
};

struct PpmStepResult {
  Vector y_next;
  PpmCertificate cert;
};

/// Approximate power prox of psi at w. With tol > 0 the inner solve stops
/// once (lambda * phi)(y_next - prox) <= tol is guaranteed by uniform
/// convexity. With tol = 0 the exact prox is used when available; otherwise
/// the inner solve runs to `inner.tol_grad`.
PpmStepResult ppm_step(const Vector& w, const ConvexOracle& oracle, const PowerParams& params,
                       double tol, const LbfgsOptions& inner = {});

/// Gradient-norm threshold (2-norm) on the inner objective that guarantees
/// a prox distance of at most tol.
double prox_distance_grad_tol(double tol, const PowerParams& params, Eigen::Index dimension);

struct PpmRecord {
  int k;
  Vector w;
  Vector y_next;
  Vector v;
  /// Error level the step was solved to (after the Relative-mode factor).
  double eps_k;
  double prox_distance_bound;
  /// psi(y^{k+1}) when finite.
  std::optional<double> psi_value;
};

enum class PpmStatus { Completed, InnerBudgetExhausted };

struct PpmTrace {
  std::vector<PpmRecord> records;
  PpmStatus status = PpmStatus::Completed;
  int total_inner_iterations = 0;
};

struct PpmBudget {
  int max_iter = 100;
  LbfgsOptions inner;
  /// Relative mode: maximum number of tightened re-solves per step.
  int max_resolves = 40;
};

PpmTrace run_ppm(const Vector& y0, const ConvexOracle& oracle, const PowerParams& params,
                 ThetaMode theta_mode, const EpsSchedule& schedule, const PpmBudget& budget);

struct Envelope {
  double value;
  Vector prox;
  Vector grad;
};

/// inf_eta psi(eta) + (lambda * phi)(y - eta), its minimizer and gradient
/// grad phi(lambda^{-1}(y - prox)).
Envelope aniso_envelope(const Vector& y, const ConvexOracle& oracle, const PowerParams& params,
                        double tol, const LbfgsOptions& inner = {});

/// (lambda * phi)(y_next - prox_true) <= eps_k.
bool eps_prox_check(const Vector& y_next, const Vector& prox_true, const PowerParams& params,
                    double eps_k);

struct LocalOrder {
  double omega;
  double alpha;
  int points;
};

/// Least-squares fit of log d_{k+1} = omega log d_k + log alpha over the
/// last 6 distances above 1e-12. Empty if fewer than 4 such points remain
/// or they are not strictly decreasing.
std::optional<LocalOrder> local_order_estimate(const std::vector<double>& distances);
std::optional<LocalOrder> local_order_estimate(
    const PpmTrace& trace, const Vector& y0,
    const std::function<double(const Vector&)>& distance_to_solutions);

/// psi(y) = kappa/2 ||y - center||_2^2 with its exact power prox for either
/// norm family. Euclidean prox moves radially; SeparablePower per coordinate.
ConvexOracle centered_quadratic(const Vector& center, double kappa);

}  // namespace powalm
