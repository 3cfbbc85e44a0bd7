#include "powalm/scalar.hpp"

#include <cmath>
#include <stdexcept>

namespace powalm {

ScalarRoot safeguarded_newton(const std::function<double(double)>& h,
                              const std::function<double(double)>& derivative, double lo,
                              double hi, double rel_tol, int max_iter) {
  const double h_lo = h(lo);
  const double h_hi = h(hi);
  if (h_lo == 0.0) return {lo, 0, true};
  if (h_hi == 0.0) return {hi, 0, true};
  if ((h_lo > 0.0) == (h_hi > 0.0)) {
    throw std::runtime_error("safeguarded_newton: root is not bracketed");
  }
  const bool increasing = h_hi > 0.0;
  double x = 0.5 * (lo + hi);
  ScalarRoot out;
  for (int it = 0; it < max_iter; ++it) {
    out.iterations = it + 1;
    const double hx = h(x);
    if (hx == 0.0) {
      out.x = x;
      out.converged = true;
      return out;
    }
    if ((hx > 0.0) == increasing) {
      hi = x;
    } else {
      lo = x;
    }
    if (hi - lo <= rel_tol * (1.0 + std::abs(x))) {
      out.x = 0.5 * (lo + hi);
      out.converged = true;
      return out;
    }
    double next = 0.5 * (lo + hi);
    if (derivative) {
      const double dx = derivative(x);
      if (dx != 0.0 && std::isfinite(dx)) {
        const double cand = x - hx / dx;
        if (cand > lo && cand < hi) next = cand;
      }
    }
    if (std::abs(next - x) <= rel_tol * (1.0 + std::abs(x))) {
      out.x = next;
      out.converged = true;
      return out;
    }
    x = next;
  }
  out.x = x;
  return out;
}

ScalarRoot bisect(const std::function<double(double)>& h, double lo, double hi, double rel_tol,
                  int max_iter) {
  return safeguarded_newton(h, {}, lo, hi, rel_tol, max_iter);
}

}  // namespace powalm
