#pragma once

// Problem instances for the augmented Lagrangian solvers:
//
//   minimize f(x) + g(Ax - b),   f(x) = 1/2 x'Qx + c'x + theta/2 ||x||^2 (+ box)
//
// where g is encoded by the constraint kind through the dual set of its
// conjugate. Generators are deterministic in (dims, seed).

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>

#include "powalm/constraint_kind.hpp"
#include "powalm/inner.hpp"
#include "powalm/power.hpp"

namespace powalm {

enum class Family { LP, QpEqBox, QpIneq, L1Reg };

const char* to_string(Family family);
Family parse_family(const std::string& name);

inline constexpr int kGeneratorVersion = 1;

class GenerationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ProblemInstance {
  Family family = Family::QpEqBox;
  ConstraintKind kind = ConstraintKind::Equality;
  Matrix A;
  Vector b;
  /// Linear cost; empty means zero.
  Vector c;
  /// Quadratic cost; empty means zero.
  Matrix Q;
  /// Weight of theta/2 ||x||^2; zero means absent.
  double theta = 0.0;
  std::optional<Box> box;

  std::uint64_t seed = 0;
  int generator_version = kGeneratorVersion;
  /// 2-norm diameter of dom f when bounded.
  std::optional<double> domain_diameter;
  std::optional<double> f_star;
  /// LP only: the primal-dual pair certified at construction.
  Vector x_hat;
  Vector y_hat;

  Eigen::Index m() const { return A.rows(); }
  Eigen::Index n() const { return A.cols(); }

  /// Smooth part f (without box) and its gradient.
  double cost(const Vector& x, Vector* grad = nullptr) const;
  /// f(x) + g(Ax - b) with g = ||.||_1 for the unit-box dual; the constraint
  /// indicator is not added for the other kinds.
  double primal_objective(const Vector& x) const;
  /// Ax - b.
  Vector residual(const Vector& x) const;
};

/// Inequality LP min c'x s.t. Ax <= b with cond_2(A) = cond_target and a
/// KKT-certified optimum.
ProblemInstance gen_lp(Eigen::Index m, Eigen::Index n, double cond_target, std::uint64_t seed);
/// Equality QP with box [-0.8, 0.8]^n and rank-deficient PSD Q.
ProblemInstance gen_qp_eq_box(Eigen::Index m, Eigen::Index n, std::uint64_t seed);
/// Same data with Ax <= b and no box. Unless the draw is bounded below with
/// a multiplier of all entries >= 0.1, the null(Q) part of c is trimmed just
/// enough to make it so. Throws
/// GenerationError when the constraints are infeasible.
ProblemInstance gen_qp_ineq(Eigen::Index m, Eigen::Index n, std::uint64_t seed);
/// min theta/2 ||x||^2 + ||Ax - b||_1.
ProblemInstance gen_l1_regression(Eigen::Index m, Eigen::Index n, double theta,
                                  std::uint64_t seed);
/// Strongly convex equality QP with n = 5, m = 2 and no box.
ProblemInstance tiny_equality_qp(std::uint64_t seed = 0);

enum class ReferenceMode { KktDirect, HighAccuracyAlm };

struct ReferenceResult {
  double f_star;
  Vector x;
  Vector y;
  ReferenceMode mode_used;
  /// Set when KktDirect had to fall back.
  std::string warning;
};

/// Solution with f* accurate to about 1e-10, stored into problem.f_star.
ReferenceResult reference_solution(ProblemInstance& problem, ReferenceMode mode);

/// Plain-text snapshot: header "family m n seed", then one block per field
/// ("name rows cols" followed by row-major entries at 17 significant digits).
void write_instance(std::ostream& out, const ProblemInstance& problem);
ProblemInstance read_instance(std::istream& in);

}  // namespace powalm
