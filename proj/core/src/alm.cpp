#include "powalm/alm.hpp"

#include <chrono>
#include <cmath>
#include <stdexcept>

#include "powalm/inner_dispatch.hpp"
#include "powalm/scalar.hpp"

namespace powalm {

namespace {

// True when clip_C(y + t s) = y for every t > 0: each coordinate that s
// pushes on already sits at the bound in that direction.
bool movement_blocked(const Vector& s, const Vector& y, ConstraintKind kind) {
  for (Eigen::Index i = 0; i < s.size(); ++i) {
    if (s[i] == 0.0) continue;
    const bool at_lower = kind == ConstraintKind::NonnegativeDual ? y[i] <= 0.0 : y[i] <= -1.0;
    const bool at_upper = kind == ConstraintKind::UnitBoxDual && y[i] >= 1.0;
    if (s[i] < 0.0 && !at_lower) return false;
    if (s[i] > 0.0 && !at_upper) return false;
  }
  return true;
}

Vector euclidean_clipped_argmax(const Vector& s, const Vector& y, const PowerParams& params,
                                ConstraintKind kind) {
  const double p = params.p();
  const double lp = abs_pow(params.lambda(), p);
  if (movement_blocked(s, y, kind)) return y;

  auto eta_at = [&](double t) { return project_dual(y + (lp / t) * s, kind); };
  auto h = [&](double u) {
    const double t = std::exp(u);
    return abs_pow(norm2(y - eta_at(t)), p - 1.0) - t;
  };
  auto dh = [&](double u) {
    const double t = std::exp(u);
    const Vector unclipped = y + (lp / t) * s;
    const Vector eta = project_dual(unclipped, kind);
    const double r = norm2(y - eta);
    if (r == 0.0) return std::numeric_limits<double>::quiet_NaN();
    double acc = 0.0;
    for (Eigen::Index i = 0; i < s.size(); ++i) {
      if (eta[i] == unclipped[i]) acc += (lp * s[i]) * (lp * s[i]);
    }
    const double dr_dt = -acc / (t * t * t * r);
    return t * ((p - 1.0) * abs_pow(r, p - 2.0) * dr_dt - 1.0);
  };

  // t_hi: since clipping is nonexpansive, h <= (lp ||s|| / t)^{p-1} - t <= 0 there.
  // Without clipping the root sits exactly at u_hi, so roundoff may give h > 0.
  double u_hi = ((p - 1.0) / p) * std::log(lp * norm2(s));
  for (double nudge = 1e-15; h(u_hi) > 0.0; nudge *= 4.0) {
    u_hi += nudge * (1.0 + std::abs(u_hi));
    if (nudge > 1e-3) throw std::runtime_error("multiplier_argmax: upper bracket is not valid");
  }
  if (h(u_hi) == 0.0) return eta_at(std::exp(u_hi));
  double u_lo = u_hi - 1.0;
  while (h(u_lo) <= 0.0) {
    u_lo -= 1.0;
    if (u_lo < -700.0) {
      throw std::runtime_error("multiplier_argmax: failed to bracket the scalar root");
    }
  }
  const ScalarRoot root = safeguarded_newton(h, dh, u_lo, u_hi, 1e-15, 300);
  return eta_at(std::exp(root.x));
}

}  // namespace

Vector multiplier_argmax(const Vector& s, const Vector& y, const PowerParams& params,
                         ConstraintKind kind) {
  if (kind == ConstraintKind::Equality) {
    return y + params.lambda() * phi_conj_grad(s, params);
  }
  const Vector yc = project_dual(y, kind);
  if (s.isZero(0.0)) return yc;
  if (params.norm() == NormFamily::SeparablePower) {
    return project_dual(yc + params.lambda() * phi_conj_grad(s, params), kind);
  }
  if (params.p() == 1.0) return project_dual(yc + params.lambda() * s, kind);
  return euclidean_clipped_argmax(s, yc, params, kind);
}

Vector classical_multiplier(const Vector& s, const Vector& y, double lambda, ConstraintKind kind) {
  return project_dual(y + lambda * s, kind);
}

double aug_lagrangian(const Vector& x, const Vector& y, const ProblemInstance& problem,
                      const PowerParams& params, Vector* grad) {
  const double f = problem.cost(x, grad);
  const Vector s = problem.residual(x);
  if (problem.kind == ConstraintKind::Equality) {
    const Vector dir = phi_conj_grad(s, params);
    if (grad) grad->noalias() += problem.A.transpose() * (y + params.lambda() * dir);
    return f + y.dot(s) + params.lambda() * phi_conj_value(s, params);
  }
  const Vector eta = multiplier_argmax(s, y, params, problem.kind);
  if (grad) grad->noalias() += problem.A.transpose() * eta;
  return f + s.dot(eta) - epi_scaled_value(y - eta, params);
}

double aug_lagrangian_value(const Vector& x, const Vector& y, const ProblemInstance& problem,
                            const PowerParams& params) {
  return aug_lagrangian(x, y, problem, params, nullptr);
}

Vector aug_lagrangian_grad_x(const Vector& x, const Vector& y, const ProblemInstance& problem,
                             const PowerParams& params) {
  Vector g(x.size());
  aug_lagrangian(x, y, problem, params, &g);
  return g;
}

double classical_aug_lagrangian(const Vector& x, const Vector& y, const ProblemInstance& problem,
                                double lambda, Vector* grad) {
  const double f = problem.cost(x, grad);
  const Vector s = problem.residual(x);
  const Vector eta = classical_multiplier(s, y, lambda, problem.kind);
  if (grad) grad->noalias() += problem.A.transpose() * eta;
  return f + s.dot(eta) - (y - eta).squaredNorm() / (2.0 * lambda);
}

Vector dual_update(const Vector& x_next, const Vector& w, const ProblemInstance& problem,
                   const PowerParams& params) {
  return multiplier_argmax(problem.residual(x_next), w, params, problem.kind);
}

double baseline_adaptive_penalty(double lambda_k, double r_next, double r_k, double delta,
                                 double tol_r) {
  if (r_next <= tol_r && r_k <= tol_r) return lambda_k;
  return r_next >= delta * r_k ? 2.0 * lambda_k : lambda_k;
}

Vector implicit_penalty(const Vector& y_next, const Vector& y, const PowerParams& params) {
  const double p = params.p();
  const double lp = abs_pow(params.lambda(), p);
  constexpr double kInf = std::numeric_limits<double>::infinity();
  auto scale = [&](double step) {
    if (p == 1.0) return params.lambda();
    return step == 0.0 ? kInf : lp * abs_pow(step, 1.0 - p);
  };
  const Vector d = y_next - y;
  if (params.norm() == NormFamily::Euclidean) return Vector::Constant(1, scale(norm2(d)));
  Vector out(d.size());
  for (Eigen::Index i = 0; i < d.size(); ++i) out[i] = scale(std::abs(d[i]));
  return out;
}

void ErgodicAverager::add(const Vector& x) {
  ++count_;
  const double k = static_cast<double>(count_);
  const double a = std::pow(k, p_ + 1.0) - std::pow(k - 1.0, p_ + 1.0);
  weight_sum_ += a;
  if (count_ == 1) {
    mean_ = x;
  } else {
    mean_ += (a / weight_sum_) * (x - mean_);
  }
}

Vector ergodic_average(const std::vector<Vector>& xs, double p) {
  if (xs.empty()) throw std::invalid_argument("ergodic_average: empty sequence");
  ErgodicAverager avg(p);
  for (const auto& x : xs) avg.add(x);
  return avg.mean();
}

namespace {

// Dual function rho(y) = inf_x L(x, y) where it has a closed form.
class DualEvaluator {
 public:
  explicit DualEvaluator(const ProblemInstance& problem) : problem_(problem) {
    const Eigen::Index n = problem.n();
    if (problem.box) {
      mode_ = Mode::Surrogate;
    } else if (problem.Q.size() > 0 || problem.theta != 0.0) {
      mode_ = Mode::Quadratic;
      Matrix H = problem.Q.size() > 0 ? problem.Q : Matrix::Zero(n, n);
      H.diagonal().array() += problem.theta;
      H_ = H;
      llt_.compute(H_);
      positive_definite_ = llt_.info() == Eigen::Success;
      if (!positive_definite_) cod_.compute(H_);
    } else {
      mode_ = Mode::Linear;
    }
  }

  GapResult gap(const Vector& x, const Vector& y_in) const {
    const Vector y = project_dual(y_in, problem_.kind);
    bool flagged = !(y.array() == y_in.array()).all();
    const double primal = problem_.primal_objective(x);
    double dual = 0.0;
    switch (mode_) {
      case Mode::Quadratic: {
        Vector z = -(problem_.A.transpose() * y);
        if (problem_.c.size() > 0) z -= problem_.c;
        Vector sol;
        if (positive_definite_) {
          sol = llt_.solve(z);
        } else {
          sol = cod_.solve(z);
          if ((H_ * sol - z).norm() > 1e-8 * (1.0 + z.norm())) flagged = true;
        }
        dual = -0.5 * z.dot(sol) - problem_.b.dot(y);
        break;
      }
      case Mode::Linear: {
        Vector reduced = problem_.A.transpose() * y;
        if (problem_.c.size() > 0) reduced += problem_.c;
        if (reduced.cwiseAbs().maxCoeff() <= 1e-8) {
          dual = -problem_.b.dot(y);
        } else {
          dual = problem_.cost(x) + y.dot(problem_.residual(x));
          flagged = true;
        }
        break;
      }
      case Mode::Surrogate:
        dual = problem_.cost(x) + y.dot(problem_.residual(x));
        flagged = true;
        break;
    }
    return {primal - dual, flagged};
  }

 private:
  enum class Mode { Quadratic, Linear, Surrogate };
  const ProblemInstance& problem_;
  Mode mode_ = Mode::Surrogate;
  Matrix H_;
  Eigen::LLT<Matrix> llt_;
  Eigen::CompleteOrthogonalDecomposition<Matrix> cod_;
  bool positive_definite_ = false;
};

// Residual whose norm measures infeasibility. For the unit-box dual this is
// the residual of the split constraint Ax - b = z, which equals
// grad (lambda * phi)(y_next - w).
Vector feasibility_residual(const ProblemInstance& problem, const Vector& s, const Vector& y_next,
                            const Vector& w, const PowerParams& params) {
  switch (problem.kind) {
    case ConstraintKind::Equality: return s;
    case ConstraintKind::NonnegativeDual: return s.cwiseMax(0.0);
    case ConstraintKind::UnitBoxDual: return epi_scaled_grad(y_next - w, params);
  }
  return s;
}

}  // namespace

GapResult primal_dual_gap(const Vector& x, const Vector& y, const ProblemInstance& problem) {
  return DualEvaluator(problem).gap(x, y);
}

std::optional<double> accuracy_from_gradient(double inner_grad_norm, double diameter) {
  if (!(diameter > 0.0) || !std::isfinite(diameter)) return std::nullopt;
  return inner_grad_norm * diameter;
}

double StoppingRule::threshold(int k, double p) const {
  double t = c / std::pow(static_cast<double>(k + 1), p + 1.0);
  if (mode == StoppingMode::GradOverDiameter) t /= diameter;
  return std::max(t, floor);
}

const char* to_string(AlmMethod method) {
  switch (method) {
    case AlmMethod::PowerAlm: return "power";
    case AlmMethod::ClassicalFixed: return "classical_fixed";
    case AlmMethod::ClassicalAdaptive: return "classical_adaptive";
  }
  return "unknown";
}

AlmMethod parse_method(const std::string& name) {
  if (name == "power") return AlmMethod::PowerAlm;
  if (name == "classical_fixed") return AlmMethod::ClassicalFixed;
  if (name == "classical_adaptive") return AlmMethod::ClassicalAdaptive;
  throw std::invalid_argument("unknown method: " + name);
}

const char* to_string(RunStatus status) {
  switch (status) {
    case RunStatus::Converged: return "converged";
    case RunStatus::OuterBudget: return "outer_budget";
    case RunStatus::InnerBudget: return "inner_budget";
    case RunStatus::InnerFailure: return "inner_failure";
  }
  return "unknown";
}

RunLog run_power_alm(const ProblemInstance& problem, const PowerParams& params,
                     const OuterConfig& config, const RecordSink& sink) {
  using Clock = std::chrono::steady_clock;
  const auto start = Clock::now();
  const bool classical = config.method != AlmMethod::PowerAlm;
  const PowerParams base = classical ? PowerParams(1.0, params.lambda()) : params;
  const double p = base.p();
  const LagrangianForm form = classical ? LagrangianForm::Classical : LagrangianForm::Power;

  RunLog log;
  Vector x = Vector::Zero(problem.n());
  if (problem.box) x = problem.box->project(x);
  const Vector y0 = Vector::Zero(problem.m());
  Vector y = y0;
  double lambda = params.lambda();
  double r_prev = std::numeric_limits<double>::infinity();
  ErgodicAverager averager(p);
  std::optional<DualEvaluator> dual;
  if (config.compute_gap) dual.emplace(problem);

  for (int k = 0; k < config.max_outer; ++k) {
    const PowerParams step = base.with_lambda(lambda);
    const Vector w = anchor(y, y0, theta(k, p, config.theta));
    const double threshold = config.rule.threshold(k, p);
    const InnerReport rep = solve_inner(problem, w, step, form, threshold, x, config.inner);
    log.cum_inner += rep.iterations;
    if (!rep.ok()) {
      log.status = rep.status == InnerStatus::BudgetExhausted ? RunStatus::InnerBudget
                                                              : RunStatus::InnerFailure;
      log.message = std::string("inner solve at outer step ") + std::to_string(k) + ": " +
                    to_string(rep.status);
      break;
    }
    x = rep.x;
    const Vector s = problem.residual(x);
    const Vector y_next = classical ? classical_multiplier(s, w, lambda, problem.kind)
                                    : multiplier_argmax(s, w, step, problem.kind);
    const Vector res = feasibility_residual(problem, s, y_next, w, step);
    averager.add(x);

    IterationRecord rec;
    rec.outer_iter = k + 1;
    rec.cum_inner = log.cum_inner;
    rec.inner_iterations = rep.iterations;
    rec.inner_stationarity = rep.stationarity;
    rec.f_val = problem.primal_objective(x);
    if (problem.f_star) rec.abs_subopt = std::abs(rec.f_val - *problem.f_star);
    rec.feas2 = norm2(res);
    rec.feas_dual = dual_norm(res, step);
    if (dual) {
      const GapResult g = dual->gap(x, y_next);
      rec.pd_gap = g.gap;
      rec.gap_flagged = g.flagged;
    }
    if (classical) {
      rec.penalty_min = rec.penalty_max = lambda;
    } else {
      const Vector pen = implicit_penalty(y_next, w, step);
      rec.penalty_min = pen.minCoeff();
      rec.penalty_max = pen.maxCoeff();
    }
    rec.lambda = lambda;
    rec.step_norm = norm2(y_next - y);
    const Vector& xe = averager.mean();
    const Vector se = problem.residual(xe);
    const Vector res_e = problem.kind == ConstraintKind::NonnegativeDual ? Vector(se.cwiseMax(0.0))
                                                                         : se;
    rec.ergodic_feas_dual = problem.kind == ConstraintKind::UnitBoxDual ? 0.0 : dual_norm(res_e, step);
    rec.ergodic_f = problem.primal_objective(xe);
    if (config.keep_iterates) {
      rec.x = x;
      rec.y = y_next;
      rec.w = w;
      rec.x_ergodic = xe;
    }
    if (config.record_time) {
      rec.elapsed_s = std::chrono::duration<double>(Clock::now() - start).count();
    }
    y = y_next;
    if (sink) sink(rec);

    bool done;
    if (problem.f_star) {
      done = *rec.abs_subopt <= config.tol_f && rec.feas2 <= config.tol_r;
    } else {
      done = rec.feas2 <= config.tol_r && rec.step_norm <= config.tol_step;
    }
    log.records.push_back(std::move(rec));
    if (done) {
      log.status = RunStatus::Converged;
      break;
    }
    if (config.method == AlmMethod::ClassicalAdaptive) {
      const double r_next = log.records.back().feas2;
      lambda = baseline_adaptive_penalty(lambda, r_next, r_prev, config.delta, config.tol_r);
      r_prev = r_next;
    }
    if (log.cum_inner >= config.max_inner_total) {
      log.status = RunStatus::InnerBudget;
      log.message = "total inner iteration budget exhausted";
      break;
    }
  }
  log.x = x;
  log.y = y;
  log.x_ergodic = averager.count() > 0 ? averager.mean() : x;
  return log;
}

}  // namespace powalm
