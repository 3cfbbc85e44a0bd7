// Reference optima f* for the generated families.

#include <algorithm>
#include <cmath>
#include <vector>

#include "powalm/alm.hpp"
#include "powalm/inner_dispatch.hpp"
#include "powalm/problems.hpp"

namespace powalm {

namespace {

Matrix hessian(const ProblemInstance& p) {
  Matrix H = p.Q.size() > 0 ? p.Q : Matrix::Zero(p.n(), p.n());
  H.diagonal().array() += p.theta;
  return H;
}

Vector linear_cost(const ProblemInstance& p) {
  return p.c.size() > 0 ? p.c : Vector::Zero(p.n());
}

struct KktSolution {
  Vector x;
  Vector y;
  bool ok = false;
};

// Stationarity plus the listed constraints as equalities:
// [H_FF  A_F'] [x_F]   [-c_F - H_FB x_B]
// [A_F   0   ] [y  ] = [ b   - A_B  x_B]
// Variables outside `free_vars` are held at `fixed`; only `rows` of A are used.
KktSolution solve_kkt(const ProblemInstance& p, const std::vector<Eigen::Index>& free_vars,
                      const Vector& fixed, const std::vector<Eigen::Index>& rows) {
  const Matrix H = hessian(p);
  const Vector c = linear_cost(p);
  const auto nf = static_cast<Eigen::Index>(free_vars.size());
  const auto mr = static_cast<Eigen::Index>(rows.size());
  Vector x = fixed;
  for (Eigen::Index j : free_vars) x[j] = 0.0;

  Matrix K = Matrix::Zero(nf + mr, nf + mr);
  Vector rhs(nf + mr);
  const Vector h_fixed = H * x;
  const Vector a_fixed = p.A * x;
  for (Eigen::Index i = 0; i < nf; ++i) {
    for (Eigen::Index j = 0; j < nf; ++j) K(i, j) = H(free_vars[i], free_vars[j]);
    for (Eigen::Index r = 0; r < mr; ++r) {
      K(i, nf + r) = p.A(rows[r], free_vars[i]);
      K(nf + r, i) = p.A(rows[r], free_vars[i]);
    }
    rhs[i] = -c[free_vars[i]] - h_fixed[free_vars[i]];
  }
  for (Eigen::Index r = 0; r < mr; ++r) rhs[nf + r] = p.b[rows[r]] - a_fixed[rows[r]];

  Eigen::FullPivLU<Matrix> lu(K);
  KktSolution out;
  if (!lu.isInvertible()) return out;
  const Vector sol = lu.solve(rhs);
  if ((K * sol - rhs).norm() > 1e-10 * (1.0 + rhs.norm())) return out;
  for (Eigen::Index i = 0; i < nf; ++i) x[free_vars[i]] = sol[i];
  out.x = x;
  out.y = Vector::Zero(p.m());
  for (Eigen::Index r = 0; r < mr; ++r) out.y[rows[r]] = sol[nf + r];
  out.ok = true;
  return out;
}

std::vector<Eigen::Index> all_indices(Eigen::Index n) {
  std::vector<Eigen::Index> v(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) v[i] = i;
  return v;
}

// Re-solves the KKT system on the active set read off an accurate iterate
// and accepts the result only if it is primal and dual feasible.
std::optional<KktSolution> polish_qp(const ProblemInstance& p, const Vector& x, const Vector& y) {
  constexpr double kActive = 1e-7;
  constexpr double kSign = 1e-8;
  if (p.kind == ConstraintKind::Equality) {
    std::vector<Eigen::Index> free_vars;
    Vector fixed = x;
    for (Eigen::Index i = 0; i < p.n(); ++i) {
      if (p.box && x[i] <= p.box->lower[i] + kActive) {
        fixed[i] = p.box->lower[i];
      } else if (p.box && x[i] >= p.box->upper[i] - kActive) {
        fixed[i] = p.box->upper[i];
      } else {
        free_vars.push_back(i);
      }
    }
    KktSolution sol = solve_kkt(p, free_vars, fixed, all_indices(p.m()));
    if (!sol.ok) return std::nullopt;
    if (p.box && !p.box->contains(sol.x, 1e-12)) return std::nullopt;
    const Vector g = hessian(p) * sol.x + linear_cost(p) + p.A.transpose() * sol.y;
    for (Eigen::Index i = 0; i < p.n(); ++i) {
      if (std::find(free_vars.begin(), free_vars.end(), i) != free_vars.end()) continue;
      const bool at_lower = sol.x[i] == p.box->lower[i];
      if (at_lower && g[i] < -kSign) return std::nullopt;
      if (!at_lower && g[i] > kSign) return std::nullopt;
    }
    if (p.box) sol.x = p.box->project(sol.x);
    return sol;
  }
  if (p.kind == ConstraintKind::NonnegativeDual) {
    std::vector<Eigen::Index> rows;
    for (Eigen::Index i = 0; i < p.m(); ++i) {
      if (y[i] > 1e-10) rows.push_back(i);
    }
    KktSolution sol = solve_kkt(p, all_indices(p.n()), x, rows);
    if (!sol.ok) return std::nullopt;
    if (sol.y.minCoeff() < -kSign) return std::nullopt;
    if (p.residual(sol.x).maxCoeff() > 1e-10) return std::nullopt;
    return sol;
  }
  return std::nullopt;
}

// Classical ALM with a doubling penalty, run until the residual and the
// inner stationarity are both below 1e-10. For quadratic costs an active-set
// KKT solve is attempted once the iterate is accurate enough to identify the
// active set; a certified KKT point ends the run early.
ReferenceResult high_accuracy_alm(const ProblemInstance& problem) {
  constexpr double kTol = 1e-10;
  constexpr double kInnerFloor = 1e-11;
  constexpr double kPolishFrom = 1e-7;
  const bool quadratic = problem.Q.size() > 0 || problem.theta != 0.0;
  Vector x = Vector::Zero(problem.n());
  if (problem.box) x = problem.box->project(x);
  Vector y = Vector::Zero(problem.m());
  double lambda = 1.0;
  double r_prev = std::numeric_limits<double>::infinity();
  double inner_tol = 1e-4;
  InnerSolveOptions opts;
  opts.max_iter = 500000;

  for (int k = 0; k < 400; ++k) {
    const InnerReport rep = solve_inner(problem, y, PowerParams(1.0, lambda),
                                        LagrangianForm::Classical, inner_tol, x, opts);
    x = rep.x;
    const Vector s = problem.residual(x);
    const Vector y_next = classical_multiplier(s, y, lambda, problem.kind);
    Vector res = problem.kind == ConstraintKind::NonnegativeDual ? Vector(s.cwiseMax(0.0)) : s;
    if (problem.kind == ConstraintKind::UnitBoxDual) res = (y_next - y) / lambda;
    const double r = res.norm();
    y = y_next;
    if (quadratic && r <= kPolishFrom) {
      if (auto polished = polish_qp(problem, x, y)) {
        return {problem.primal_objective(polished->x), polished->x, polished->y,
                ReferenceMode::HighAccuracyAlm, {}};
      }
    }
    if (r <= kTol && inner_tol <= kInnerFloor) break;
    if (r >= 0.1 * r_prev && lambda < 1e8) lambda *= 2.0;
    r_prev = r;
    inner_tol = std::max(kInnerFloor, std::min(inner_tol, 1e-2 * r));
  }
  return {problem.primal_objective(x), x, y, ReferenceMode::HighAccuracyAlm, {}};
}

}  // namespace

ReferenceResult reference_solution(ProblemInstance& problem, ReferenceMode mode) {
  ReferenceResult out;
  if (problem.family == Family::LP && problem.x_hat.size() > 0) {
    out = {problem.c.dot(problem.x_hat), problem.x_hat, problem.y_hat, ReferenceMode::KktDirect, {}};
  } else if (mode == ReferenceMode::KktDirect) {
    std::string warning;
    if (problem.kind == ConstraintKind::Equality) {
      const Vector unused = Vector::Zero(problem.n());
      KktSolution sol = solve_kkt(problem, all_indices(problem.n()), unused,
                                  all_indices(problem.m()));
      if (!sol.ok) {
        warning = "KKT system singular; using high-accuracy ALM";
      } else if (problem.box && !problem.box->contains(sol.x, 1e-12)) {
        warning = "box active at the KKT point; using high-accuracy ALM";
      } else {
        out = {problem.cost(sol.x), sol.x, sol.y, ReferenceMode::KktDirect, {}};
      }
    } else {
      warning = "no direct KKT system for this constraint kind; using high-accuracy ALM";
    }
    if (!warning.empty()) {
      out = high_accuracy_alm(problem);
      out.warning = warning;
    }
  } else {
    out = high_accuracy_alm(problem);
  }
  problem.f_star = out.f_star;
  return out;
}

}  // namespace powalm
