#include "powalm/inner_dispatch.hpp"

#include <stdexcept>

namespace powalm {

InnerReport solve_inner(const ProblemInstance& problem, const Vector& w, const PowerParams& params,
                        LagrangianForm form, double threshold, const Vector& x0,
                        const InnerSolveOptions& options) {
  SmoothOracle smooth;
  smooth.dimension = problem.n();
  if (form == LagrangianForm::Power) {
    smooth.evaluate = [&](const Vector& x, Vector* grad) {
      return aug_lagrangian(x, w, problem, params, grad);
    };
  } else {
    const double lambda = params.lambda();
    smooth.evaluate = [&, lambda](const Vector& x, Vector* grad) {
      return classical_aug_lagrangian(x, w, problem, lambda, grad);
    };
  }

  InnerEngine engine = options.engine;
  if (engine == InnerEngine::Auto) engine = problem.box ? InnerEngine::Apg : InnerEngine::Lbfgs;
  if (engine == InnerEngine::Lbfgs) {
    if (problem.box) throw std::invalid_argument("solve_inner: L-BFGS cannot handle a box");
    LbfgsOptions opt;
    opt.tol_grad = threshold;
    opt.max_iter = options.max_iter;
    opt.memory = options.lbfgs_memory;
    return lbfgs_minimize(smooth, x0, opt);
  }
  CompositeOracle composite{std::move(smooth), problem.box};
  ApgOptions opt;
  opt.tol = threshold;
  opt.max_iter = options.max_iter;
  opt.adaptive_restart = options.apg_restart;
  return adaptive_apg_minimize(composite, x0, opt);
}

InnerReport solve_inner(const ProblemInstance& problem, const Vector& w, const PowerParams& params,
                        const StoppingRule& rule, int k, const Vector& x0,
                        const InnerSolveOptions& options) {
  return solve_inner(problem, w, params, LagrangianForm::Power, rule.threshold(k, params.p()), x0,
                     options);
}

}  // namespace powalm
