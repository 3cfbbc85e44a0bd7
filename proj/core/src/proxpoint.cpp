#include "powalm/proxpoint.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "powalm/scalar.hpp"

namespace powalm {

double theta(int k, double p, ThetaMode mode) {
  if (mode == ThetaMode::Plain) return 1.0;
  if (k <= 0) return 0.0;
  const double ratio = static_cast<double>(k) / static_cast<double>(k + 1);
  return std::pow(ratio, p + 1.0);
}

Vector anchor(const Vector& yk, const Vector& y0, double theta_k) {
  if (theta_k == 1.0) return yk;
  if (theta_k == 0.0) return y0;
  return theta_k * yk + (1.0 - theta_k) * y0;
}

double eps(int k, double p, const EpsSchedule& schedule) {
  if (schedule.c == 0.0) return 0.0;
  return schedule.c / std::pow(static_cast<double>(k + 1), p + 1.0);
}

namespace {

double rate_bound(int k, const PowerParams& params, double diameter, double c, double constant) {
  const double p = params.p();
  const double numerator =
      abs_pow(params.lambda(), -p) * constant * abs_pow(diameter, p + 1.0) + c;
  return numerator / std::pow(static_cast<double>(k), p);
}

// Factor kappa with ||g||_* <= kappa ||g||_2 in the dual norm of the family.
double dual_norm_factor(const PowerParams& params, Eigen::Index dimension) {
  if (params.norm() == NormFamily::Euclidean) return 1.0;
  const double exponent = std::max(0.0, 1.0 / (params.q() + 1.0) - 0.5);
  return std::pow(static_cast<double>(dimension), exponent);
}

// Uniform convexity of psi + (lambda * phi)(w - .) gives
// ||y - prox||^p <= 2^{p-1} (p+1) lambda^p ||g||_* for g in its subdifferential at y.
double prox_distance_from_stationarity(double grad2, const PowerParams& params,
                                       Eigen::Index dimension) {
  const double p = params.p();
  const double lp = abs_pow(params.lambda(), p);
  const double dist_pow_p =
      std::exp2(p - 1.0) * (p + 1.0) * lp * dual_norm_factor(params, dimension) * grad2;
  return abs_pow(dist_pow_p, (p + 1.0) / p) / (lp * (p + 1.0));
}

}  // namespace

double ppm_rate_bound(int k, const PowerParams& params, double diameter, double c) {
  return rate_bound(k, params, diameter, c, std::pow(params.p() + 1.0, params.p()));
}

double envelope_rate_bound(int k, const PowerParams& params, double diameter, double c) {
  const double p = params.p();
  return rate_bound(k, params, diameter, c, std::pow(p * p + p, p));
}

double prox_distance_grad_tol(double tol, const PowerParams& params, Eigen::Index dimension) {
  const double p = params.p();
  const double lp = abs_pow(params.lambda(), p);
  const double radius = abs_pow(tol * (p + 1.0) * lp, 1.0 / (p + 1.0));
  return abs_pow(radius, p) /
         (std::exp2(p - 1.0) * (p + 1.0) * lp * dual_norm_factor(params, dimension));
}

PpmStepResult ppm_step(const Vector& w, const ConvexOracle& oracle, const PowerParams& params,
                       double tol, const LbfgsOptions& inner) {
  if (tol < 0.0) throw std::invalid_argument("ppm_step: tol must be nonnegative");
  PpmStepResult out;
  if (tol == 0.0 && oracle.exact_prox) {
    out.y_next = oracle.exact_prox(w, params);
    out.cert.exact = true;
  } else {
    SmoothOracle sub;
    sub.dimension = w.size();
    sub.evaluate = [&](const Vector& eta, Vector* grad) {
      const Vector gap = w - eta;
      const double f = oracle.value(eta) + epi_scaled_value(gap, params);
      if (grad) *grad = oracle.subgradient(eta) - epi_scaled_grad(gap, params);
      return f;
    };
    LbfgsOptions opts = inner;
    if (tol > 0.0) opts.tol_grad = prox_distance_grad_tol(tol, params, w.size());
    const InnerReport rep = lbfgs_minimize(sub, w, opts);
    out.y_next = rep.x;
    out.cert.inner_stationarity = rep.stationarity;
    out.cert.inner_iterations = rep.iterations;
    out.cert.status = rep.status;
    out.cert.prox_distance_bound =
        prox_distance_from_stationarity(rep.stationarity, params, w.size());
  }
  out.cert.v = epi_scaled_grad(w - out.y_next, params);
  return out;
}

PpmTrace run_ppm(const Vector& y0, const ConvexOracle& oracle, const PowerParams& params,
                 ThetaMode theta_mode, const EpsSchedule& schedule, const PpmBudget& budget) {
  PpmTrace trace;
  Vector y = y0;
  for (int k = 0; k < budget.max_iter; ++k) {
    const Vector w = anchor(y, y0, theta(k, params.p(), theta_mode));
    const double eps_base = eps(k, params.p(), schedule);
    double eps_k = eps_base;
    PpmStepResult step = ppm_step(w, oracle, params, eps_k, budget.inner);
    trace.total_inner_iterations += step.cert.inner_iterations;

    if (schedule.mode == EpsMode::Relative && eps_base > 0.0) {
      for (int r = 0; r < budget.max_resolves && step.cert.status == InnerStatus::Converged; ++r) {
        const double moved = primal_norm(step.y_next - y, params);
        const double target = eps_base * std::min(1.0, abs_pow(moved, schedule.t));
        eps_k = target;
        if (step.cert.prox_distance_bound <= target) break;
        // A step that did not move at all cannot meet a zero target; tighten
        // until the inner solve leaves the starting point.
        const double tol = target > 0.0 ? target : 1e-3 * step.cert.prox_distance_bound;
        step = ppm_step(w, oracle, params, tol, budget.inner);
        trace.total_inner_iterations += step.cert.inner_iterations;
      }
    }
    if (step.cert.status != InnerStatus::Converged) {
      trace.status = PpmStatus::InnerBudgetExhausted;
      return trace;
    }

    // y^{k+1} = w - lambda grad phi*(v); equals the inner solution up to roundoff.
    Vector y_next = w - params.lambda() * phi_conj_grad(step.cert.v, params);
    if (step.cert.exact) y_next = step.y_next;
    PpmRecord rec{k, w, y_next, step.cert.v, eps_k, step.cert.prox_distance_bound, std::nullopt};
    const double psi = oracle.value(y_next);
    if (std::isfinite(psi)) rec.psi_value = psi;
    trace.records.push_back(std::move(rec));
    y = std::move(y_next);
  }
  return trace;
}

Envelope aniso_envelope(const Vector& y, const ConvexOracle& oracle, const PowerParams& params,
                        double tol, const LbfgsOptions& inner) {
  const PpmStepResult step = ppm_step(y, oracle, params, tol, inner);
  if (step.cert.status != InnerStatus::Converged) {
    throw std::runtime_error(std::string("aniso_envelope: inner solve ") +
                             to_string(step.cert.status));
  }
  const Vector gap = y - step.y_next;
  return {oracle.value(step.y_next) + epi_scaled_value(gap, params), step.y_next, step.cert.v};
}

bool eps_prox_check(const Vector& y_next, const Vector& prox_true, const PowerParams& params,
                    double eps_k) {
  return epi_scaled_value(y_next - prox_true, params) <= eps_k;
}

std::optional<LocalOrder> local_order_estimate(const std::vector<double>& distances) {
  constexpr double kFloor = 1e-12;
  constexpr std::size_t kWindow = 6;
  constexpr std::size_t kMinPoints = 4;
  std::vector<double> usable;
  for (double d : distances) {
    if (d > kFloor) usable.push_back(d);
  }
  if (usable.size() > kWindow) usable.erase(usable.begin(), usable.end() - kWindow);
  if (usable.size() < kMinPoints) return std::nullopt;
  for (std::size_t i = 1; i < usable.size(); ++i) {
    if (!(usable[i] < usable[i - 1])) return std::nullopt;
  }

  const std::size_t n = usable.size() - 1;
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double lx = std::log(usable[i]);
    const double ly = std::log(usable[i + 1]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  const double nn = static_cast<double>(n);
  const double denom = nn * sxx - sx * sx;
  if (denom == 0.0) return std::nullopt;
  const double omega = (nn * sxy - sx * sy) / denom;
  const double log_alpha = (sy - omega * sx) / nn;
  return LocalOrder{omega, std::exp(log_alpha), static_cast<int>(usable.size())};
}

std::optional<LocalOrder> local_order_estimate(
    const PpmTrace& trace, const Vector& y0,
    const std::function<double(const Vector&)>& distance_to_solutions) {
  std::vector<double> d{distance_to_solutions(y0)};
  for (const auto& rec : trace.records) d.push_back(distance_to_solutions(rec.y_next));
  return local_order_estimate(d);
}

namespace {

// Remaining distance to the center after one prox step from distance r:
// solve kappa (r - u) = lambda^{-p} u^p for the step length u in [0, r] and
// return lambda^{-p} u^p / kappa, which avoids cancellation in r - u.
double quadratic_prox_distance(double r, double kappa, const PowerParams& params) {
  if (r == 0.0) return 0.0;
  const double p = params.p();
  const double lp_inv = abs_pow(params.lambda(), -p);
  if (p == 1.0) return r * lp_inv / (kappa + lp_inv);
  // Scaled unknown tau = u / r keeps full relative accuracy for tiny r.
  const double a = lp_inv * abs_pow(r, p - 1.0);
  auto h = [&](double tau) { return a * abs_pow(tau, p) - kappa * (1.0 - tau); };
  auto dh = [&](double tau) { return p * a * abs_pow(tau, p - 1.0) + kappa; };
  const ScalarRoot root = safeguarded_newton(h, dh, 0.0, 1.0, 1e-16, 400);
  return std::min(r, a * abs_pow(root.x, p) * r / kappa);
}

}  // namespace

ConvexOracle centered_quadratic(const Vector& center, double kappa) {
  ConvexOracle o;
  o.value = [center, kappa](const Vector& y) { return 0.5 * kappa * (y - center).squaredNorm(); };
  o.subgradient = [center, kappa](const Vector& y) -> Vector { return kappa * (y - center); };
  o.exact_prox = [center, kappa](const Vector& w, const PowerParams& params) -> Vector {
    const Vector offset = w - center;
    if (params.norm() == NormFamily::Euclidean) {
      const double r = norm2(offset);
      if (r == 0.0) return center;
      return center + (quadratic_prox_distance(r, kappa, params) / r) * offset;
    }
    Vector out = center;
    for (Eigen::Index i = 0; i < offset.size(); ++i) {
      const double r = std::abs(offset[i]);
      const double d = quadratic_prox_distance(r, kappa, params);
      out[i] += offset[i] < 0.0 ? -d : d;
    }
    return out;
  };
  return o;
}

}  // namespace powalm
