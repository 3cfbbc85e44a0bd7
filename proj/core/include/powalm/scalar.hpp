#pragma once

#include <functional>
#include <optional>

namespace powalm {

struct ScalarRoot {
  double x = 0.0;
  int iterations = 0;
  bool converged = false;
};

/// Root of a monotone function on [lo, hi] where h(lo) and h(hi) have
/// opposite signs. Newton steps from `derivative` are taken when they stay
/// strictly inside the current bracket, bisection otherwise. Stops once the
/// bracket is narrower than rel_tol * (1 + |x|).
ScalarRoot safeguarded_newton(const std::function<double(double)>& h,
                              const std::function<double(double)>& derivative, double lo,
                              double hi, double rel_tol = 1e-14, int max_iter = 200);

/// Same contract without derivative information.
ScalarRoot bisect(const std::function<double(double)>& h, double lo, double hi,
                  double rel_tol = 1e-14, int max_iter = 400);

}  // namespace powalm
