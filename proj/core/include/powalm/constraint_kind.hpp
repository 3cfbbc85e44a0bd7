#pragma once

#include <string>

#include <Eigen/Dense>

namespace powalm {

/// Dual set of the multipliers: all of R^m (equality constraints), the
/// nonnegative orthant (Ax <= b) or the unit box (g = ||.||_1).
enum class ConstraintKind { Equality, NonnegativeDual, UnitBoxDual };

const char* to_string(ConstraintKind kind);
ConstraintKind parse_constraint_kind(const std::string& name);

/// Euclidean projection onto the dual set.
Eigen::VectorXd project_dual(const Eigen::VectorXd& y, ConstraintKind kind);
bool in_dual_set(const Eigen::VectorXd& y, ConstraintKind kind, double tol = 0.0);

}  // namespace powalm
