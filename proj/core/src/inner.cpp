#include "powalm/inner.hpp"

#include <algorithm>
#include <cfloat>
#include <cmath>
#include <deque>
#include <limits>

namespace powalm {

Vector SmoothOracle::gradient(const Vector& x) const {
  Vector g(x.size());
  evaluate(x, &g);
  return g;
}

Vector Box::project(const Vector& x) const { return x.cwiseMax(lower).cwiseMin(upper); }

bool Box::contains(const Vector& x, double tol) const {
  return ((x - lower).array() >= -tol).all() && ((upper - x).array() >= -tol).all();
}

double Box::diameter() const { return (upper - lower).norm(); }

const char* to_string(InnerStatus status) {
  switch (status) {
    case InnerStatus::Converged: return "converged";
    case InnerStatus::BudgetExhausted: return "budget_exhausted";
    case InnerStatus::LineSearchFailed: return "line_search_failed";
    case InnerStatus::NumericalFailure: return "numerical_failure";
  }
  return "unknown";
}

namespace {

struct CurvaturePair {
  Vector s;
  Vector y;
  double rho;
};

Vector two_loop_direction(const std::deque<CurvaturePair>& pairs, const Vector& g) {
  Vector q = g;
  std::vector<double> alpha(pairs.size());
  for (std::size_t i = pairs.size(); i-- > 0;) {
    alpha[i] = pairs[i].rho * pairs[i].s.dot(q);
    q -= alpha[i] * pairs[i].y;
  }
  if (!pairs.empty()) {
    const auto& last = pairs.back();
    q *= last.s.dot(last.y) / last.y.squaredNorm();
  }
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    const double beta = pairs[i].rho * pairs[i].y.dot(q);
    q += (alpha[i] - beta) * pairs[i].s;
  }
  return -q;
}

struct Trial {
  Vector x;
  Vector g;
  double f = std::numeric_limits<double>::infinity();
  bool found = false;
};

// Bracketing search for a step satisfying the weak Wolfe conditions. If only
// sufficient decrease can be met, the best such point is returned with
// `found` set. Near the roundoff floor of f the Armijo test is replaced by
// the Hager-Zhang approximate Wolfe slope test.
Trial weak_wolfe_search(const SmoothOracle& oracle, const Vector& x, double f, double gd,
                        const Vector& d, double alpha, const LbfgsOptions& opt) {
  double lo = 0.0;
  double hi = std::numeric_limits<double>::infinity();
  const double f_noise = 1e-10 * std::abs(f);
  Trial armijo;
  Vector g_trial(x.size());
  for (int ls = 0; ls < opt.max_line_search; ++ls) {
    const Vector xt = x + alpha * d;
    const double ft = oracle.evaluate(xt, &g_trial);
    if (!std::isfinite(ft) || ft > f + opt.c1 * alpha * gd) {
      const double slope = g_trial.dot(d);
      if (std::isfinite(ft) && ft <= f + f_noise && slope <= (2.0 * opt.c1 - 1.0) * gd &&
          slope >= opt.c2 * gd) {
        return Trial{xt, g_trial, ft, true};
      }
      hi = alpha;
    } else {
      if (ft < armijo.f) {
        armijo.x = xt;
        armijo.g = g_trial;
        armijo.f = ft;
        armijo.found = true;
      }
      if (g_trial.dot(d) < opt.c2 * gd) {
        lo = alpha;
      } else {
        Trial out{xt, g_trial, ft, true};
        return out;
      }
    }
    alpha = std::isinf(hi) ? 2.0 * alpha : 0.5 * (lo + hi);
  }
  return armijo;
}

Trial steepest_backtracking(const SmoothOracle& oracle, const Vector& x, double f,
                            const Vector& g, const LbfgsOptions& opt) {
  const double gn2 = g.squaredNorm();
  double alpha = 1.0 / std::sqrt(gn2);
  Vector g_trial(x.size());
  for (int ls = 0; ls < 2 * opt.max_line_search; ++ls) {
    const Vector xt = x - alpha * g;
    const double ft = oracle.evaluate(xt, &g_trial);
    if (std::isfinite(ft) && ft <= f - opt.c1 * alpha * gn2 && ft < f) {
      return Trial{xt, g_trial, ft, true};
    }
    alpha *= 0.5;
  }
  return {};
}

}  // namespace

InnerReport lbfgs_minimize(const SmoothOracle& oracle, const Vector& x0,
                           const LbfgsOptions& opt) {
  InnerReport report;
  Vector x = x0;
  Vector g(x.size());
  double f = oracle.evaluate(x, &g);
  report.x = x;
  report.value = f;
  report.stationarity = g.norm();
  if (!std::isfinite(f) || !g.allFinite()) {
    report.status = InnerStatus::NumericalFailure;
    return report;
  }
  if (report.stationarity <= opt.tol_grad) {
    report.status = InnerStatus::Converged;
    return report;
  }

  std::deque<CurvaturePair> pairs;
  for (int it = 1; it <= opt.max_iter; ++it) {
    Vector d = two_loop_direction(pairs, g);
    double gd = g.dot(d);
    if (!(gd < 0.0) || !d.allFinite()) {
      pairs.clear();
      d = -g;
      gd = -g.squaredNorm();
    }
    const double alpha0 = pairs.empty() ? std::min(1.0, 1.0 / g.norm()) : 1.0;
    Trial trial = weak_wolfe_search(oracle, x, f, gd, d, alpha0, opt);
    if (!trial.found) {
      pairs.clear();
      trial = steepest_backtracking(oracle, x, f, g, opt);
    }
    if (!trial.found) {
      report.iterations = it - 1;
      report.status = InnerStatus::LineSearchFailed;
      return report;
    }

    const Vector s = trial.x - x;
    const Vector y = trial.g - g;
    const double sy = s.dot(y);
    if (sy > 1e-10 * s.norm() * y.norm()) {
      pairs.push_back({s, y, 1.0 / sy});
      if (static_cast<int>(pairs.size()) > opt.memory) pairs.pop_front();
    }
    x = std::move(trial.x);
    g = std::move(trial.g);
    f = trial.f;

    report.x = x;
    report.value = f;
    report.iterations = it;
    report.stationarity = g.norm();
    if (report.stationarity <= opt.tol_grad) {
      report.status = InnerStatus::Converged;
      return report;
    }
  }
  report.status = InnerStatus::BudgetExhausted;
  return report;
}

double prox_gradient_residual(const CompositeOracle& oracle, const Vector& x, const Vector& grad,
                              double model_constant) {
  if (!oracle.box) return grad.norm();
  const Vector step = oracle.prox(x - grad / model_constant);
  return model_constant * (x - step).norm();
}

bool descent_inequality_holds(double f_point, const Vector& grad_point, const Vector& point,
                              double f_next, const Vector& grad_next, const Vector& next,
                              double model_constant) {
  if (!std::isfinite(f_next) || !grad_next.allFinite()) return false;
  const Vector d = next - point;
  const double scale = std::max(std::abs(f_point), std::abs(f_next));
  if (std::abs(f_next - f_point) > 1e-10 * scale) {
    const double model = f_point + grad_point.dot(d) + 0.5 * model_constant * d.squaredNorm();
    return f_next <= model + 8.0 * DBL_EPSILON * scale;
  }
  // The value difference is dominated by roundoff; the trapezoid estimate
  // of f(next) - f(point) - <grad, d> is exact for quadratics.
  return (grad_next - grad_point).dot(d) <= model_constant * d.squaredNorm();
}

InnerReport adaptive_apg_minimize(const CompositeOracle& oracle, const Vector& x0,
                                  const ApgOptions& opt) {
  constexpr double kMaxModelConstant = 1e300;
  InnerReport report;
  Vector x = oracle.prox(x0);
  Vector g(x.size());
  double f = oracle.smooth.evaluate(x, &g);
  double model = opt.initial_model_constant;

  report.x = x;
  report.value = f;
  report.model_constant = model;
  if (!std::isfinite(f) || !g.allFinite()) {
    report.status = InnerStatus::NumericalFailure;
    return report;
  }
  report.stationarity = prox_gradient_residual(oracle, x, g, model);
  if (report.stationarity <= opt.tol ||
      (opt.stop && opt.stop(ApgProgress{0, x, report.stationarity}))) {
    report.status = InnerStatus::Converged;
    return report;
  }

  Vector x_prev = x;
  double t = 1.0;
  double beta = 0.0;
  Vector point(x.size());
  Vector g_point(x.size());
  Vector g_next(x.size());
  for (int it = 1; it <= opt.max_iter; ++it) {
    double f_point;
    if (beta == 0.0) {
      point = x;
      g_point = g;
      f_point = f;
    } else {
      point = x + beta * (x - x_prev);
      f_point = oracle.smooth.evaluate(point, &g_point);
    }

    Vector next;
    double f_next;
    while (true) {
      next = oracle.prox(point - g_point / model);
      f_next = oracle.smooth.evaluate(next, &g_next);
      if (descent_inequality_holds(f_point, g_point, point, f_next, g_next, next, model)) break;
      model *= 2.0;
      if (model > kMaxModelConstant) {
        report.iterations = it;
        report.status = InnerStatus::NumericalFailure;
        return report;
      }
    }
    if (opt.trace) opt.trace->push_back({model, point, next});

    const bool restart = opt.adaptive_restart && (point - next).dot(next - x) > 0.0;
    x_prev = std::move(x);
    x = std::move(next);
    f = f_next;
    g = g_next;

    report.x = x;
    report.value = f;
    report.iterations = it;
    report.model_constant = model;
    report.stationarity = prox_gradient_residual(oracle, x, g, model);
    if (report.stationarity <= opt.tol ||
        (opt.stop && opt.stop(ApgProgress{it, x, report.stationarity}))) {
      report.status = InnerStatus::Converged;
      return report;
    }

    model *= 0.5;
    if (restart) {
      t = 1.0;
      beta = 0.0;
    } else {
      const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
      beta = (t - 1.0) / t_next;
      t = t_next;
    }
  }
  report.status = InnerStatus::BudgetExhausted;
  return report;
}

}  // namespace powalm
