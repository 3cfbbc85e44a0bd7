#include "powalm/problems.hpp"

#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>
#include <vector>

#include "powalm/rng.hpp"

namespace powalm {

const char* to_string(ConstraintKind kind) {
  switch (kind) {
    case ConstraintKind::Equality: return "equality";
    case ConstraintKind::NonnegativeDual: return "nonnegative";
    case ConstraintKind::UnitBoxDual: return "unit_box";
  }
  return "unknown";
}

ConstraintKind parse_constraint_kind(const std::string& name) {
  if (name == "equality") return ConstraintKind::Equality;
  if (name == "nonnegative") return ConstraintKind::NonnegativeDual;
  if (name == "unit_box") return ConstraintKind::UnitBoxDual;
  throw std::invalid_argument("unknown constraint kind: " + name);
}

Vector project_dual(const Vector& y, ConstraintKind kind) {
  switch (kind) {
    case ConstraintKind::Equality: return y;
    case ConstraintKind::NonnegativeDual: return y.cwiseMax(0.0);
    case ConstraintKind::UnitBoxDual: return y.cwiseMax(-1.0).cwiseMin(1.0);
  }
  return y;
}

bool in_dual_set(const Vector& y, ConstraintKind kind, double tol) {
  switch (kind) {
    case ConstraintKind::Equality: return true;
    case ConstraintKind::NonnegativeDual: return (y.array() >= -tol).all();
    case ConstraintKind::UnitBoxDual: return (y.array().abs() <= 1.0 + tol).all();
  }
  return false;
}

const char* to_string(Family family) {
  switch (family) {
    case Family::LP: return "lp";
    case Family::QpEqBox: return "qp_eq_box";
    case Family::QpIneq: return "qp_ineq";
    case Family::L1Reg: return "l1_reg";
  }
  return "unknown";
}

Family parse_family(const std::string& name) {
  if (name == "lp") return Family::LP;
  if (name == "qp_eq_box") return Family::QpEqBox;
  if (name == "qp_ineq") return Family::QpIneq;
  if (name == "l1_reg") return Family::L1Reg;
  throw std::invalid_argument("unknown problem family: " + name);
}

double ProblemInstance::cost(const Vector& x, Vector* grad) const {
  double f = 0.0;
  if (grad) grad->setZero(x.size());
  if (Q.size() > 0) {
    const Vector qx = Q * x;
    f += 0.5 * x.dot(qx);
    if (grad) *grad += qx;
  }
  if (c.size() > 0) {
    f += c.dot(x);
    if (grad) *grad += c;
  }
  if (theta != 0.0) {
    f += 0.5 * theta * x.squaredNorm();
    if (grad) *grad += theta * x;
  }
  return f;
}

double ProblemInstance::primal_objective(const Vector& x) const {
  double f = cost(x);
  if (kind == ConstraintKind::UnitBoxDual) f += residual(x).lpNorm<1>();
  return f;
}

Vector ProblemInstance::residual(const Vector& x) const { return A * x - b; }

namespace {

// Stream ids, one per drawn field.
enum Stream : std::uint64_t {
  kStreamCost = 1,
  kStreamSpectrum = 2,
  kStreamRankDrop = 3,
  kStreamBasis = 4,
  kStreamConstraint = 5,
  kStreamRhs = 6,
  kStreamLeft = 7,
  kStreamPrimal = 8,
  kStreamActive = 9,
  kStreamSlack = 10,
  kStreamDual = 11,
};

Matrix orthonormal_columns(const Matrix& gaussian) {
  Eigen::HouseholderQR<Matrix> qr(gaussian);
  return qr.householderQ() * Matrix::Identity(gaussian.rows(), gaussian.cols());
}

struct QpData {
  Matrix Q;
  Vector c;
  Matrix A;
  Vector b;
  Matrix null_basis;
};

QpData draw_qp(Eigen::Index m, Eigen::Index n, std::uint64_t seed) {
  QpData d;
  d.c = Rng(seed, kStreamCost).normal_vector(n);
  Vector diag = Rng(seed, kStreamSpectrum).normal_vector(n, 5.0, 1.0).cwiseMax(0.0);
  Rng drop(seed, kStreamRankDrop);
  const auto zeros = drop.uniform_int((n + 3) / 4, n / 2);
  for (Eigen::Index i : drop.sample_without_replacement(n, zeros)) diag[i] = 0.0;
  const Matrix V = orthonormal_columns(Rng(seed, kStreamBasis).normal_matrix(n, n));
  const Matrix Q = V * diag.asDiagonal() * V.transpose();
  d.Q = 0.5 * (Q + Q.transpose());
  d.A = Rng(seed, kStreamConstraint).normal_matrix(m, n);
  d.b = Rng(seed, kStreamRhs).uniform_vector(m, -1.0, 1.0);

  std::vector<Eigen::Index> null_cols;
  for (Eigen::Index i = 0; i < n; ++i) {
    if (diag[i] == 0.0) null_cols.push_back(i);
  }
  d.null_basis.resize(n, static_cast<Eigen::Index>(null_cols.size()));
  for (std::size_t j = 0; j < null_cols.size(); ++j) {
    d.null_basis.col(static_cast<Eigen::Index>(j)) = V.col(null_cols[j]);
  }
  return d;
}

// Lawson-Hanson active-set method for min ||M y - rhs|| subject to y >= 0.
Vector nnls(const Matrix& M, const Vector& rhs) {
  const Eigen::Index m = M.cols();
  Vector y = Vector::Zero(m);
  std::vector<bool> passive(static_cast<std::size_t>(m), false);
  const double tol = 1e-12 * (1.0 + M.cwiseAbs().maxCoeff());
  const int max_outer = static_cast<int>(3 * m + 10);

  for (int outer = 0; outer < max_outer; ++outer) {
    Vector w = M.transpose() * (rhs - M * y);
    Eigen::Index j = -1;
    double best = tol;
    for (Eigen::Index i = 0; i < m; ++i) {
      if (!passive[i] && w[i] > best) {
        best = w[i];
        j = i;
      }
    }
    if (j < 0) break;
    passive[j] = true;

    for (int inner = 0; inner < max_outer; ++inner) {
      std::vector<Eigen::Index> idx;
      for (Eigen::Index i = 0; i < m; ++i) {
        if (passive[i]) idx.push_back(i);
      }
      Matrix Mp(M.rows(), static_cast<Eigen::Index>(idx.size()));
      for (std::size_t k = 0; k < idx.size(); ++k) Mp.col(k) = M.col(idx[k]);
      const Vector zp = Mp.completeOrthogonalDecomposition().solve(rhs);
      Vector z = Vector::Zero(m);
      for (std::size_t k = 0; k < idx.size(); ++k) z[idx[k]] = zp[k];

      bool all_positive = true;
      double alpha = 1.0;
      for (Eigen::Index i : idx) {
        if (z[i] <= tol) {
          all_positive = false;
          alpha = std::min(alpha, y[i] / (y[i] - z[i]));
        }
      }
      if (all_positive) {
        y = z;
        break;
      }
      y += alpha * (z - y);
      for (Eigen::Index i : idx) {
        if (y[i] <= tol) {
          passive[i] = false;
          y[i] = 0.0;
        }
      }
    }
  }
  return y;
}

bool box_feasible(const Matrix& A, const Vector& b, const Box& box) {
  const Vector x_min_norm = A.completeOrthogonalDecomposition().solve(b);
  if (box.contains(x_min_norm) && (A * x_min_norm - b).norm() <= 1e-9 * (1.0 + b.norm())) {
    return true;
  }
  CompositeOracle ls;
  ls.box = box;
  ls.smooth.dimension = A.cols();
  ls.smooth.evaluate = [&](const Vector& x, Vector* grad) {
    const Vector r = A * x - b;
    if (grad) *grad = A.transpose() * r;
    return 0.5 * r.squaredNorm();
  };
  ApgOptions opt;
  opt.tol = 1e-12;
  opt.max_iter = 200000;
  const InnerReport rep = adaptive_apg_minimize(ls, box.project(x_min_norm), opt);
  return (A * rep.x - b).norm() <= 1e-8 * (1.0 + b.norm());
}

bool polyhedron_feasible(const Matrix& A, const Vector& b) {
  const Vector x0 = A.completeOrthogonalDecomposition().solve(b);
  if ((A * x0 - b).maxCoeff() <= 1e-9) return true;
  SmoothOracle viol;
  viol.dimension = A.cols();
  viol.evaluate = [&](const Vector& x, Vector* grad) {
    const Vector r = (A * x - b).cwiseMax(0.0);
    if (grad) *grad = A.transpose() * r;
    return 0.5 * r.squaredNorm();
  };
  LbfgsOptions opt;
  opt.tol_grad = 1e-13;
  const InnerReport rep = lbfgs_minimize(viol, x0, opt);
  return (A * rep.x - b).maxCoeff() <= 1e-8;
}

}  // namespace

ProblemInstance gen_lp(Eigen::Index m, Eigen::Index n, double cond_target, std::uint64_t seed) {
  if (!(m > n && n >= 1)) throw GenerationError("gen_lp: requires m > n >= 1");
  if (!(cond_target >= 1.0)) throw GenerationError("gen_lp: cond_target must be >= 1");

  const Matrix U = orthonormal_columns(Rng(seed, kStreamLeft).normal_matrix(m, n));
  const Matrix V = orthonormal_columns(Rng(seed, kStreamBasis).normal_matrix(n, n));
  Vector sigma(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double frac = n == 1 ? 0.0 : static_cast<double>(i) / static_cast<double>(n - 1);
    sigma[i] = std::pow(cond_target, -frac);
  }

  ProblemInstance p;
  p.family = Family::LP;
  p.kind = ConstraintKind::NonnegativeDual;
  p.seed = seed;
  p.A = U * sigma.asDiagonal() * V.transpose();

  p.x_hat = Rng(seed, kStreamPrimal).uniform_vector(n, 0.0, 1.0);
  Rng active_rng(seed, kStreamActive);
  const auto active = active_rng.sample_without_replacement(m, n);
  Vector slack = Rng(seed, kStreamSlack).uniform_vector(m, 0.1, 1.0);
  Vector dual_draw = Rng(seed, kStreamDual).uniform_vector(m, 0.1, 1.0);
  p.y_hat = Vector::Zero(m);
  for (Eigen::Index i : active) {
    slack[i] = 0.0;
    p.y_hat[i] = dual_draw[i];
  }
  p.b = p.A * p.x_hat + slack;
  p.c = -p.A.transpose() * p.y_hat;
  p.f_star = p.c.dot(p.x_hat);

  const double stationarity = (p.c + p.A.transpose() * p.y_hat).cwiseAbs().maxCoeff();
  const double complementarity = (p.y_hat.cwiseProduct(p.b - p.A * p.x_hat)).cwiseAbs().maxCoeff();
  const double primal = (p.A * p.x_hat - p.b).maxCoeff();
  if (stationarity > 1e-10 || complementarity > 1e-10 || primal > 1e-10) {
    throw GenerationError("gen_lp: constructed pair violates KKT");
  }
  return p;
}

ProblemInstance gen_qp_eq_box(Eigen::Index m, Eigen::Index n, std::uint64_t seed) {
  if (n < 4 || m >= n || m < 1) throw GenerationError("gen_qp_eq_box: requires n >= 4, 1 <= m < n");
  QpData d = draw_qp(m, n, seed);
  ProblemInstance p;
  p.family = Family::QpEqBox;
  p.kind = ConstraintKind::Equality;
  p.seed = seed;
  p.Q = std::move(d.Q);
  p.c = std::move(d.c);
  p.A = std::move(d.A);
  p.b = std::move(d.b);
  p.box = Box{Vector::Constant(n, -0.8), Vector::Constant(n, 0.8)};
  p.domain_diameter = 1.6 * std::sqrt(static_cast<double>(n));
  if (!box_feasible(p.A, p.b, *p.box)) {
    throw GenerationError("gen_qp_eq_box: no feasible point in the box");
  }
  return p;
}

ProblemInstance gen_qp_ineq(Eigen::Index m, Eigen::Index n, std::uint64_t seed) {
  if (n < 4 || m < 1) throw GenerationError("gen_qp_ineq: requires n >= 4, m >= 1");
  QpData d = draw_qp(m, n, seed);
  ProblemInstance p;
  p.family = Family::QpIneq;
  p.kind = ConstraintKind::NonnegativeDual;
  p.seed = seed;
  p.Q = std::move(d.Q);
  p.c = std::move(d.c);
  p.A = std::move(d.A);
  p.b = std::move(d.b);
  if (!polyhedron_feasible(p.A, p.b)) {
    throw GenerationError("gen_qp_ineq: constraints are infeasible");
  }
  // Bounded below iff some y >= 0 puts c + A'y in range(Q), i.e. N'(c + A'y) = 0.
  // Asking for y >= kMargin instead keeps c away from the edge of that set,
  // where the optimal set picks up flat directions to infinity. A draw that
  // fails this keeps Q, A, b and loses the smallest null(Q) component of c
  // that restores it: with y = kMargin + z and z the NNLS minimizer of
  // ||N'(c + A'y)||, subtract N N'(c + A'y) from c.
  constexpr double kMargin = 0.1;
  if (d.null_basis.cols() > 0) {
    const Matrix M = d.null_basis.transpose() * p.A.transpose();
    const Vector shift = kMargin * (M * Vector::Ones(p.m()));
    const Vector rhs = -d.null_basis.transpose() * p.c - shift;
    const Vector excess = M * nnls(M, rhs) - rhs;
    if (excess.norm() > 1e-9 * (1.0 + rhs.norm())) {
      p.c -= d.null_basis * excess;
      const Vector rhs2 = -d.null_basis.transpose() * p.c - shift;
      if ((M * nnls(M, rhs2) - rhs2).norm() > 1e-9 * (1.0 + rhs2.norm())) {
        throw GenerationError("gen_qp_ineq: could not make the objective bounded below");
      }
    }
  }
  return p;
}

ProblemInstance gen_l1_regression(Eigen::Index m, Eigen::Index n, double theta,
                                  std::uint64_t seed) {
  if (!(theta > 0.0)) throw GenerationError("gen_l1_regression: theta must be positive");
  ProblemInstance p;
  p.family = Family::L1Reg;
  p.kind = ConstraintKind::UnitBoxDual;
  p.seed = seed;
  p.theta = theta;
  p.A = Rng(seed, kStreamConstraint).uniform_matrix(m, n, -5.0, 5.0);
  p.b = Rng(seed, kStreamRhs).normal_vector(m);
  return p;
}

ProblemInstance tiny_equality_qp(std::uint64_t seed) {
  constexpr Eigen::Index n = 5;
  constexpr Eigen::Index m = 2;
  const Matrix B = Rng(seed, kStreamBasis).normal_matrix(n, n);
  ProblemInstance p;
  p.family = Family::QpEqBox;
  p.kind = ConstraintKind::Equality;
  p.seed = seed;
  p.Q = B.transpose() * B + Matrix::Identity(n, n);
  p.Q = 0.5 * (p.Q + p.Q.transpose()).eval();
  p.c = Rng(seed, kStreamCost).normal_vector(n);
  p.A = Rng(seed, kStreamConstraint).normal_matrix(m, n);
  p.b = Rng(seed, kStreamRhs).uniform_vector(m, -1.0, 1.0);
  return p;
}

namespace {

void write_scalar(std::ostream& out, const char* name, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  out << name << ' ' << buf << '\n';
}

void write_matrix(std::ostream& out, const char* name, const Matrix& a) {
  out << name << ' ' << a.rows() << ' ' << a.cols() << '\n';
  char buf[64];
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      std::snprintf(buf, sizeof buf, "%.17g", a(i, j));
      if (j > 0) out << ' ';
      out << buf;
    }
    out << '\n';
  }
}

void write_vector(std::ostream& out, const char* name, const Vector& v) {
  out << name << ' ' << v.size() << '\n';
  char buf[64];
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%.17g", v[i]);
    if (i > 0) out << ' ';
    out << buf;
  }
  out << '\n';
}

double read_double(std::istream& in) {
  std::string tok;
  if (!(in >> tok)) throw std::runtime_error("read_instance: unexpected end of input");
  return std::stod(tok);
}

}  // namespace

void write_instance(std::ostream& out, const ProblemInstance& p) {
  out << to_string(p.family) << ' ' << p.m() << ' ' << p.n() << ' ' << p.seed << '\n';
  out << "version " << p.generator_version << '\n';
  out << "kind " << to_string(p.kind) << '\n';
  if (p.theta != 0.0) write_scalar(out, "theta", p.theta);
  if (p.domain_diameter) write_scalar(out, "diameter", *p.domain_diameter);
  if (p.f_star) write_scalar(out, "f_star", *p.f_star);
  write_matrix(out, "A", p.A);
  write_vector(out, "b", p.b);
  if (p.c.size() > 0) write_vector(out, "c", p.c);
  if (p.Q.size() > 0) write_matrix(out, "Q", p.Q);
  if (p.box) {
    write_vector(out, "lower", p.box->lower);
    write_vector(out, "upper", p.box->upper);
  }
  if (p.x_hat.size() > 0) write_vector(out, "x_hat", p.x_hat);
  if (p.y_hat.size() > 0) write_vector(out, "y_hat", p.y_hat);
}

ProblemInstance read_instance(std::istream& in) {
  ProblemInstance p;
  std::string family;
  Eigen::Index m = 0, n = 0;
  if (!(in >> family >> m >> n >> p.seed)) throw std::runtime_error("read_instance: bad header");
  p.family = parse_family(family);
  std::string name;
  Vector lower, upper;
  while (in >> name) {
    if (name == "version") {
      in >> p.generator_version;
    } else if (name == "kind") {
      std::string k;
      in >> k;
      p.kind = parse_constraint_kind(k);
    } else if (name == "theta") {
      p.theta = read_double(in);
    } else if (name == "diameter") {
      p.domain_diameter = read_double(in);
    } else if (name == "f_star") {
      p.f_star = read_double(in);
    } else if (name == "A" || name == "Q") {
      Eigen::Index r = 0, cols = 0;
      in >> r >> cols;
      Matrix a(r, cols);
      for (Eigen::Index i = 0; i < r; ++i) {
        for (Eigen::Index j = 0; j < cols; ++j) a(i, j) = read_double(in);
      }
      (name == "A" ? p.A : p.Q) = std::move(a);
    } else {
      Eigen::Index len = 0;
      in >> len;
      Vector v(len);
      for (Eigen::Index i = 0; i < len; ++i) v[i] = read_double(in);
      if (name == "b") p.b = std::move(v);
      else if (name == "c") p.c = std::move(v);
      else if (name == "lower") lower = std::move(v);
      else if (name == "upper") upper = std::move(v);
      else if (name == "x_hat") p.x_hat = std::move(v);
      else if (name == "y_hat") p.y_hat = std::move(v);
      else throw std::runtime_error("read_instance: unknown field " + name);
    }
  }
  if (p.A.rows() != m || p.A.cols() != n) throw std::runtime_error("read_instance: shape mismatch");
  if (lower.size() > 0) p.box = Box{lower, upper};
  return p;
}

}  // namespace powalm
