// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any FAIL.
//
//   powalm_acceptance [--only N[,N...]]

#include <algorithm>
#include <chrono>
#include <cstdarg>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "powalm/alm.hpp"
#include "powalm/bench.hpp"
#include "powalm/inner.hpp"
#include "powalm/power.hpp"
#include "powalm/problems.hpp"
#include "powalm/proxpoint.hpp"
#include "powalm/rng.hpp"
#include "support/dual_oracle.hpp"

namespace fs = std::filesystem;
using powalm::ConstraintKind;
using powalm::Matrix;
using powalm::NormFamily;
using powalm::PowerParams;
using powalm::ProblemInstance;
using powalm::Vector;

namespace {

struct Verdict {
  bool pass = true;
  std::string detail;
};

std::string fmt(const char* format, ...) __attribute__((format(printf, 1, 2)));
std::string fmt(const char* format, ...) {
  char buf[512];
  va_list args;
  va_start(args, format);
  std::vsnprintf(buf, sizeof buf, format, args);
  va_end(args);
  return buf;
}

constexpr NormFamily kNorms[] = {NormFamily::Euclidean, NormFamily::SeparablePower};

// Entries spread over six orders of magnitude.
Vector wide_vector(powalm::Rng& rng, Eigen::Index n) {
  Vector v = rng.normal_vector(n);
  return v * std::pow(10.0, rng.uniform(-3.0, 3.0));
}

double rel_inf(const Vector& got, const Vector& want) {
  return (got - want).lpNorm<Eigen::Infinity>() / std::max(want.lpNorm<Eigen::Infinity>(), 1e-300);
}

Verdict ac1_conjugacy() {
  powalm::Rng rng(2024, 1);
  double worst_inverse = 0.0;
  double worst_norm = 0.0;
  for (NormFamily norm : kNorms) {
    for (double p : {1.0, 1.25, 1.0 / 0.7, 2.0}) {
      const PowerParams params(p, 1.0, norm);
      for (int i = 0; i < 10000; ++i) {
        const Eigen::Index n = rng.uniform_int(1, 10);
        const Vector v = wide_vector(rng, n);
        worst_inverse = std::max(
            worst_inverse, rel_inf(powalm::phi_grad(powalm::phi_conj_grad(v, params), params), v));
        const Vector x = wide_vector(rng, n);
        const double want = std::pow(powalm::primal_norm(x, params), p);
        const double got = powalm::dual_norm(powalm::phi_grad(x, params), params);
        worst_norm = std::max(worst_norm, std::abs(got - want) / want);
      }
    }
  }
  Verdict v;
  v.pass = worst_inverse <= 1e-10 && worst_norm <= 1e-10;
  v.detail = fmt("max rel err: inverse %.2e, norm %.2e", worst_inverse, worst_norm);
  return v;
}

Verdict ac2_uniform_convexity() {
  powalm::Rng rng(2024, 2);
  double worst = std::numeric_limits<double>::infinity();
  for (NormFamily norm : kNorms) {
    for (double p : {1.0, 1.5, 2.0, 3.0}) {
      const PowerParams params(p, 1.0, norm);
      for (int i = 0; i < 10000; ++i) {
        const Eigen::Index n = rng.uniform_int(1, 10);
        const Vector x = wide_vector(rng, n);
        // Mix far-apart and nearly equal pairs.
        const Vector y = i % 2 ? wide_vector(rng, n) : Vector(x + 1e-4 * wide_vector(rng, n));
        const double scale = powalm::phi_value(x, params) + powalm::phi_value(y, params) +
                             std::abs(powalm::phi_grad(y, params).dot(x - y)) +
                             powalm::phi_value(x - y, params);
        const double slack = powalm::uniform_convexity_slack(x, y, params);
        worst = std::min(worst, slack / std::max(scale, 1e-300));
      }
    }
  }
  Verdict v;
  v.pass = worst >= -1e-9;
  v.detail = fmt("min slack/scale %.2e", worst);
  return v;
}

Verdict ac3_ppm_rates() {
  powalm::Rng rng(2024, 3);
  const Vector center = rng.normal_vector(5);
  const powalm::ConvexOracle psi = powalm::centered_quadratic(center, 1.0);
  Verdict v;
  double worst = 0.0;
  for (double p : {1.0, 2.0}) {
    const PowerParams params(p, 1.0);
    for (auto mode : {powalm::ThetaMode::Plain, powalm::ThetaMode::Averaging}) {
      for (int start = 0; start < 5; ++start) {
        const Vector y0 = center + rng.normal_vector(5) * std::pow(10.0, start - 2);
        const double d0 = (y0 - center).norm();
        powalm::PpmBudget budget;
        budget.max_iter = 200;
        const auto trace = powalm::run_ppm(y0, psi, params, mode, {}, budget);
        if (trace.records.size() != 200) {
          v.pass = false;
          continue;
        }
        for (const auto& r : trace.records) {
          const int k = r.k + 1;
          const double subopt = *r.psi_value;
          const double bound = powalm::ppm_rate_bound(k, params, d0, 0.0);
          worst = std::max(worst, subopt / bound);
          if (subopt > bound) v.pass = false;
        }
      }
    }
  }
  v.detail = fmt("max subopt/bound %.3f over 200 steps", worst);
  return v;
}

Verdict ac4_local_order() {
  const double kappa = 1.0;
  const double lambda = 1.0;
  const PowerParams params(2.0, lambda);
  const Vector center = Vector::Constant(5, 0.5);
  const powalm::ConvexOracle psi = powalm::centered_quadratic(center, kappa);
  // mu is the growth constant in psi >= mu dist^2, i.e. kappa / 2.
  const double mu = kappa / 2.0;
  const double omega = 2.0;
  const double ratio_bound = 1.05 * std::pow(1.0 / (lambda * std::pow(mu, params.q())), omega);
  Verdict v;
  double worst_ratio = 0.0;
  double min_omega = std::numeric_limits<double>::infinity();
  double max_omega = 0.0;
  powalm::Rng rng(2024, 4);
  for (int start = 0; start < 5; ++start) {
    Vector y0 = center + 30.0 * rng.normal_vector(5);
    powalm::PpmBudget budget;
    budget.max_iter = 200;
    const auto trace = powalm::run_ppm(y0, psi, params, powalm::ThetaMode::Plain, {}, budget);
    const auto dist = [&](const Vector& y) { return (y - center).norm(); };
    const auto est = powalm::local_order_estimate(trace, y0, dist);
    if (!est) {
      v.pass = false;
      continue;
    }
    min_omega = std::min(min_omega, est->omega);
    max_omega = std::max(max_omega, est->omega);
    if (est->omega < 1.8 || est->omega > 2.2) v.pass = false;
    double d_prev = dist(y0);
    for (const auto& r : trace.records) {
      const double d = dist(r.y_next);
      if (d_prev <= 1e-2 && d_prev > 0.0) {
        const double ratio = d / (d_prev * d_prev);
        worst_ratio = std::max(worst_ratio, ratio);
        if (ratio > ratio_bound) v.pass = false;
      }
      d_prev = d;
    }
  }
  v.detail = fmt("omega in [%.3f, %.3f]; max d+/d^2 %.3f vs bound %.3f", min_omega, max_omega,
                 worst_ratio, ratio_bound);
  return v;
}

powalm::SmoothOracle lagrangian_oracle(const ProblemInstance& p, const Vector& y,
                                       const PowerParams& params) {
  powalm::SmoothOracle o;
  o.dimension = p.n();
  o.evaluate = [&p, y, params](const Vector& x, Vector* g) {
    return powalm::aug_lagrangian(x, y, p, params, g);
  };
  return o;
}

// Dual prox of the tiny QP written from the dual function
// d(eta) = -1/2 (c + A'eta)' Q^{-1} (c + A'eta) - b'eta.
Vector dual_prox(const ProblemInstance& p, const Vector& y, double pw, double lambda,
                 bool separable) {
  const Eigen::LLT<Matrix> llt(p.Q);
  const auto grad = [&](const Vector& eta) {
    const Vector x = llt.solve(-(p.c + p.A.transpose() * eta));
    return Vector(p.A * x - p.b + std::pow(lambda, -pw) * oracle::phi_grad(y - eta, pw, separable));
  };
  Vector eta = y;
  Vector g = grad(eta);
  double step = 1.0;
  for (int it = 0; it < 1000000; ++it) {
    const Vector next = eta + step * g;
    const Vector move = next - eta;
    const double mm = move.squaredNorm();
    if (mm == 0.0) break;
    const Vector g_next = grad(next);
    if (-(g_next - g).dot(move) <= mm / step) {
      eta = next;
      g = g_next;
      if (std::sqrt(mm) <= 1e-13 * step) break;
      step *= 1.5;
    } else {
      step *= 0.5;
    }
  }
  return eta;
}

Verdict ac5_inexact_bridge() {
  const ProblemInstance p = powalm::tiny_equality_qp(0);
  const double eps = 1e-4;
  const double pw = 2.0;
  powalm::Rng rng(2024, 5);
  Verdict v;
  double worst = 0.0;
  double worst_gap_err = 0.0;
  for (NormFamily norm : kNorms) {
    const bool separable = norm == NormFamily::SeparablePower;
    for (double lambda : {0.3, 1.0}) {
      const PowerParams params(pw, lambda, norm);
      for (int trial = 0; trial < 10; ++trial) {
        const Vector y = rng.normal_vector(p.m());
        const powalm::SmoothOracle L = lagrangian_oracle(p, y, params);
        powalm::LbfgsOptions tight;
        tight.tol_grad = 1e-12;
        tight.max_iter = 100000;
        const auto best = powalm::lbfgs_minimize(L, Vector::Zero(p.n()), tight);
        const Vector prox = dual_prox(p, y, pw, lambda, separable);
        const auto gap = [&](const Vector& x) { return L.evaluate(x, nullptr) - best.value; };
        for (int dir = 0; dir < 10; ++dir) {
          // Bisection on the ray x* + t d for the point with Lagrangian gap eps.
          const Vector d = rng.normal_vector(p.n()).normalized();
          double lo = 0.0;
          double hi = 1.0;
          while (gap(best.x + hi * d) < eps) hi *= 2.0;
          for (int it = 0; it < 200; ++it) {
            const double mid = 0.5 * (lo + hi);
            (gap(best.x + mid * d) < eps ? lo : hi) = mid;
          }
          const Vector x = best.x + lo * d;
          worst_gap_err = std::max(worst_gap_err, std::abs(gap(x) - eps) / eps);
          const Vector y_plus = powalm::dual_update(x, y, p, params);
          const double dist = std::pow(lambda, -pw) * oracle::phi(y_plus - prox, pw, separable);
          const double bound = std::pow(2.0, pw - 1.0) * eps;
          worst = std::max(worst, dist / bound);
          if (dist > bound) v.pass = false;
        }
        // The exact step must land on the prox itself.
        const Vector exact = powalm::dual_update(best.x, y, p, params);
        if ((exact - prox).norm() > 1e-6 * (1.0 + prox.norm())) v.pass = false;
      }
    }
  }
  v.detail = fmt("max distance/bound %.3f (gap hit to %.1e relative)", worst, worst_gap_err);
  return v;
}

Vector dual_set_point(powalm::Rng& rng, Eigen::Index m, ConstraintKind kind) {
  Vector y = rng.normal_vector(m) * 2.0;
  if (kind == ConstraintKind::Equality) return y;
  // Leave some coordinates on the boundary.
  return powalm::project_dual(y, kind);
}

Verdict ac6_argmax_oracle() {
  powalm::Rng rng(2024, 6);
  Verdict v;
  double worst = 0.0;
  for (ConstraintKind kind :
       {ConstraintKind::Equality, ConstraintKind::NonnegativeDual, ConstraintKind::UnitBoxDual}) {
    for (NormFamily norm : kNorms) {
      for (double pw : {1.0, 2.0}) {
        for (int trial = 0; trial < 100; ++trial) {
          const Eigen::Index m = rng.uniform_int(1, 8);
          const Vector s = rng.normal_vector(m) * std::pow(10.0, rng.uniform(-1.0, 1.0));
          const Vector y = dual_set_point(rng, m, kind);
          const double lambda = std::pow(10.0, rng.uniform(-1.0, 0.5));
          const Vector eta = powalm::multiplier_argmax(s, y, PowerParams(pw, lambda, norm), kind);
          const oracle::DualProblem d{s, y, pw, lambda, norm == NormFamily::SeparablePower, kind};
          const double err = (eta - oracle::maximize(d, 1e-10)).lpNorm<Eigen::Infinity>();
          worst = std::max(worst, err);
          if (!(err <= 1e-6) || !powalm::in_dual_set(eta, kind)) v.pass = false;
        }
      }
    }
  }
  v.detail = fmt("max |eta - brute force|_inf %.2e over 1200 draws", worst);
  return v;
}

Verdict ac7_implicit_penalty() {
  ProblemInstance p = powalm::gen_qp_eq_box(20, 40, 0);
  powalm::reference_solution(p, powalm::ReferenceMode::KktDirect);
  // A small penalty keeps the run away from convergence for all 100 steps,
  // so every step is large enough to be measured against itself.
  const PowerParams params(2.0, 0.01);
  powalm::OuterConfig cfg;
  cfg.max_outer = 100;
  cfg.tol_f = -1.0;
  cfg.tol_r = -1.0;
  cfg.keep_iterates = true;
  cfg.compute_gap = false;
  const powalm::RunLog log = powalm::run_power_alm(p, params, cfg);
  Verdict v;
  double worst = 0.0;
  double smallest_step = std::numeric_limits<double>::infinity();
  for (const auto& r : log.records) {
    const Vector dy = r.y - r.w;
    const Vector s = p.residual(r.x);
    const Vector pen = powalm::implicit_penalty(r.y, r.w, params);
    smallest_step = std::min(smallest_step, dy.norm());
    if (dy.norm() == 0.0) {
      v.pass = false;
      continue;
    }
    worst = std::max(worst, (dy - pen[0] * s).norm() / dy.norm());
  }
  if (log.records.size() != 100 || worst > 1e-12) v.pass = false;
  v.detail = fmt("%zu iterations; max |dy - lambda_k s| / |dy| %.2e (smallest |dy| %.1e)",
                 log.records.size(), worst, smallest_step);
  return v;
}

Verdict ac8_ergodic_bound() {
  ProblemInstance p = powalm::tiny_equality_qp(0);
  const auto ref = powalm::reference_solution(p, powalm::ReferenceMode::KktDirect);
  const double f_star = ref.f_star;
  const double delta = 2.0 * ref.y.norm() + 1.0;
  const double c = 1e-3;
  // With Q >= mu_Q I, a gradient of norm g certifies a Lagrangian gap of at
  // most g^2 / (2 mu_Q); this gradient constant keeps every inner gap below
  // c / (k+1)^{p+1}.
  const double mu_q = Eigen::SelfAdjointEigenSolver<Matrix>(p.Q).eigenvalues().minCoeff();
  Verdict v;
  double worst = 0.0;
  for (double pw : {1.0, 1.0 / 0.8, 2.0}) {
    for (double lambda : {0.1, 1.0}) {
      const PowerParams params(pw, lambda);
      powalm::OuterConfig cfg;
      cfg.theta = powalm::ThetaMode::Averaging;
      cfg.rule.c = std::sqrt(2.0 * mu_q * c);
      cfg.max_outer = 100;
      cfg.tol_f = -1.0;
      cfg.tol_r = -1.0;
      cfg.keep_iterates = true;
      cfg.compute_gap = false;
      const powalm::RunLog log = powalm::run_power_alm(p, params, cfg);
      if (log.records.size() != 100) v.pass = false;
      // max over the delta-ball of (lambda * phi)(y0 - y) with y0 = 0.
      const double radius_term = std::pow(lambda, -pw) * std::pow(delta, pw + 1.0) / (pw + 1.0);
      for (const auto& r : log.records) {
        const int K = r.outer_iter;
        const double lhs = std::max(p.residual(r.x_ergodic).norm(),
                                    std::abs(p.cost(r.x_ergodic) - f_star));
        const double bound = (c + radius_term * std::pow(pw + 1.0, pw + 1.0)) / std::pow(K, pw);
        worst = std::max(worst, lhs / bound);
        if (lhs > bound) v.pass = false;
      }
    }
  }
  v.detail = fmt("max lhs/bound %.3e over K <= 100", worst);
  return v;
}

std::string desk_config_path() { return std::string(POWALM_CONFIG_DIR) + "/qp_eq_box_desk.cfg"; }

Verdict ac9_protocol(const fs::path& out) {
  powalm::ExperimentConfig cfg = powalm::load_config(desk_config_path());
  cfg.output_dir = out.string();
  const powalm::ExperimentResult result = powalm::run_experiment(cfg);
  const auto find = [&](const std::string& method) -> const powalm::SummaryRow* {
    for (const auto& r : result.summary) {
      if (r.method == method) return &r;
    }
    return nullptr;
  };
  const auto label = [](const char* spec) { return powalm::SolverSpec::parse(spec).label(); };

  Verdict v;
  std::string worst_success;
  int min_success = 1 << 30;
  for (const auto& r : result.summary) {
    if (r.success < min_success) {
      min_success = r.success;
      worst_success = r.method;
    }
    if (r.success < 9) v.pass = false;
  }
  const auto* fixed = find(label("method=classical_fixed lambda=0.1"));
  const auto* q9 = find(label("method=power q=0.9 lambda=0.1"));
  const auto* q8 = find(label("method=power q=0.8 lambda=0.1"));
  long long best_adaptive = std::numeric_limits<long long>::max();
  for (const char* spec : {"method=classical_adaptive lambda=0.01 delta=0.1",
                           "method=classical_adaptive lambda=0.1 delta=0.1",
                           "method=classical_adaptive lambda=1 delta=0.1"}) {
    const auto* row = find(label(spec));
    if (row && row->success > 0) best_adaptive = std::min(best_adaptive, row->median_inner);
  }
  if (!fixed || !q9 || !q8 || best_adaptive == std::numeric_limits<long long>::max()) {
    v.pass = false;
    v.detail = "missing summary rows";
    return v;
  }
  const bool trend = q8->median_inner < fixed->median_inner && q9->median_inner < fixed->median_inner;
  const bool near_adaptive = q8->median_inner <= 2 * best_adaptive;
  v.pass = v.pass && trend && near_adaptive;
  v.detail = fmt("(a) min success %d/10 (%s); (b) median q=0.8 %lld, q=0.9 %lld vs fixed %lld; "
                 "(c) q=0.8 %lld vs 2 x best adaptive %lld",
                 min_success, worst_success.c_str(), q8->median_inner, q9->median_inner,
                 fixed->median_inner, q8->median_inner, 2 * best_adaptive);
  return v;
}

Verdict ac10_reduction() {
  ProblemInstance p = powalm::tiny_equality_qp(0);
  powalm::reference_solution(p, powalm::ReferenceMode::KktDirect);
  Verdict v;
  double worst = 0.0;
  std::size_t steps = 0;
  for (double lambda : {0.1, 1.0, 10.0}) {
    powalm::OuterConfig power_cfg;
    power_cfg.keep_iterates = true;
    powalm::OuterConfig classical_cfg = power_cfg;
    classical_cfg.method = powalm::AlmMethod::ClassicalFixed;
    const auto a = powalm::run_power_alm(p, PowerParams(1.0, lambda), power_cfg);
    const auto b = powalm::run_power_alm(p, PowerParams(1.0, lambda), classical_cfg);
    if (a.records.size() != b.records.size() || !a.converged()) v.pass = false;
    const std::size_t n = std::min(a.records.size(), b.records.size());
    steps += n;
    for (std::size_t k = 0; k < n; ++k) {
      const double dx = (a.records[k].x - b.records[k].x).lpNorm<Eigen::Infinity>() /
                        (1.0 + b.records[k].x.lpNorm<Eigen::Infinity>());
      const double dy = (a.records[k].y - b.records[k].y).lpNorm<Eigen::Infinity>() /
                        (1.0 + b.records[k].y.lpNorm<Eigen::Infinity>());
      worst = std::max({worst, dx, dy});
    }
  }
  if (worst > 1e-12) v.pass = false;
  v.detail = fmt("max iterate difference %.2e over %zu outer steps", worst, steps);
  return v;
}

std::vector<fs::path> files_under(const fs::path& dir) {
  std::vector<fs::path> out;
  for (const auto& e : fs::recursive_directory_iterator(dir)) {
    if (e.is_regular_file()) out.push_back(fs::relative(e.path(), dir));
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Verdict ac11_determinism(const fs::path& first, const fs::path& second) {
  Verdict v;
  if (!fs::exists(first)) {
    powalm::ExperimentConfig cfg = powalm::load_config(desk_config_path());
    cfg.output_dir = first.string();
    powalm::run_experiment(cfg);
  }
  powalm::ExperimentConfig cfg = powalm::load_config(desk_config_path());
  cfg.output_dir = second.string();
  powalm::RunOptions opts;
  opts.jobs = 2;
  powalm::run_experiment(cfg, opts);
  const auto a = files_under(first);
  const auto b = files_under(second);
  int differing = 0;
  if (a != b) {
    v.pass = false;
    v.detail = "file lists differ";
    return v;
  }
  for (const auto& f : a) differing += slurp(first / f) != slurp(second / f);
  v.pass = differing == 0 && !a.empty();
  v.detail = fmt("%zu files compared, %d differ", a.size(), differing);
  return v;
}

struct Criterion {
  int id;
  const char* name;
  double time_limit_s;
  std::function<Verdict()> run;
};

}  // namespace

int main(int argc, char** argv) {
  std::set<int> only;
  for (int i = 1; i + 1 < argc; ++i) {
    if (std::string(argv[i]) == "--only") {
      std::stringstream list(argv[i + 1]);
      for (std::string tok; std::getline(list, tok, ',');) only.insert(std::stoi(tok));
    }
  }

  const fs::path work = fs::temp_directory_path() / "powalm_acceptance";
  fs::remove_all(work);
  fs::create_directories(work);
  const fs::path run_a = work / "run_a";
  const fs::path run_b = work / "run_b";

  const std::vector<Criterion> criteria = {
      {1, "conjugacy and norm identities", 1.0, ac1_conjugacy},
      {2, "uniform convexity slack", 1.0, ac2_uniform_convexity},
      {3, "exact proximal point rate bounds", 5.0, ac3_ppm_rates},
      {4, "local superlinear order", 5.0, ac4_local_order},
      {5, "inexact step to prox-distance bridge", 5.0, ac5_inexact_bridge},
      {6, "multiplier argmax vs brute force", 30.0, ac6_argmax_oracle},
      {7, "implicit penalty identity", 10.0, ac7_implicit_penalty},
      {8, "ergodic rate bound", 30.0, ac8_ergodic_bound},
      {9, "desk-scale box QP protocol", 600.0, [&] { return ac9_protocol(run_a); }},
      {10, "unit power equals classical ALM", 5.0, ac10_reduction},
      // Same budget as the experiment it reruns.
      {11, "byte-identical reruns", 600.0, [&] { return ac11_determinism(run_a, run_b); }},
  };

  int failures = 0;
  for (const auto& c : criteria) {
    if (!only.empty() && !only.count(c.id)) continue;
    const auto start = std::chrono::steady_clock::now();
    Verdict v;
    try {
      v = c.run();
    } catch (const std::exception& e) {
      v.pass = false;
      v.detail = std::string("exception: ") + e.what();
    }
    const double elapsed =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const bool in_time = elapsed <= c.time_limit_s;
    const bool pass = v.pass && in_time;
    failures += !pass;
    std::printf("[%s] AC%d %s: %s; %.2f s (limit %.0f s)%s\n", pass ? "PASS" : "FAIL", c.id,
                c.name, v.detail.c_str(), elapsed, c.time_limit_s, in_time ? "" : " OVER TIME");
    std::fflush(stdout);
  }
  fs::remove_all(work);
  std::printf("%d failed\n", failures);
  return failures == 0 ? 0 : 1;
}
