#pragma once

// Inner solve of an outer step: x ~ argmin_x L_lambda(x, w) over the box of
// the problem, if any.

#include "powalm/alm.hpp"

namespace powalm {

enum class LagrangianForm { Power, Classical };

/// Minimizes the augmented Lagrangian at multiplier w to the given threshold
/// on the gradient norm (no box, L-BFGS) or the prox-gradient residual (box,
/// adaptive APG).
InnerReport solve_inner(const ProblemInstance& problem, const Vector& w, const PowerParams& params,
                        LagrangianForm form, double threshold, const Vector& x0,
                        const InnerSolveOptions& options = {});

/// Same with the threshold taken from the rule at 0-based outer index k.
InnerReport solve_inner(const ProblemInstance& problem, const Vector& w, const PowerParams& params,
                        const StoppingRule& rule, int k, const Vector& x0,
                        const InnerSolveOptions& options = {});

}  // namespace powalm
