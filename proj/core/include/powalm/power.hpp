#pragma once

// Power prox-functions phi = 1/(p+1) ||.||^{p+1}, their conjugates and the
// epi-scaled variant lambda * phi used as the proximal term everywhere else.
//
// Two norm families are supported. Euclidean uses the 2-norm for both the
// primal and the dual side. SeparablePower uses the (p+1)-norm on the primal
// side, which makes phi a separable sum, and the (q+1)-norm on the dual side.

#include <Eigen/Dense>

namespace powalm {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

enum class NormFamily { Euclidean, SeparablePower };

const char* to_string(NormFamily norm);

/// Dual exponent q = 1/p, i.e. 1/(p+1) + 1/(q+1) = 1. Throws
/// std::domain_error for p < 1.
double conjugate_exponent(double p);

class PowerParams {
 public:
  /// Builds from the primal power; q is derived.
  PowerParams(double p, double lambda, NormFamily norm = NormFamily::Euclidean);
  /// Builds from an explicit (p, q) pair and rejects pairs that are not
  /// conjugate to 1e-12 relative.
  PowerParams(double p, double q, double lambda, NormFamily norm);

  /// The experiments are parameterized by the penalty power q + 1.
  static PowerParams from_dual_power(double q, double lambda,
                                     NormFamily norm = NormFamily::Euclidean);

  double p() const { return p_; }
  double q() const { return q_; }
  double lambda() const { return lambda_; }
  NormFamily norm() const { return norm_; }

  PowerParams with_lambda(double lambda) const;

 private:
  double p_;
  double q_;
  double lambda_;
  NormFamily norm_;
};

/// |t|^alpha evaluated as exp(alpha log|t|), with exact branches for
/// alpha in {0, 1, 2} and an exact zero for |t| < 1e-300.
double abs_pow(double t, double alpha);

/// Euclidean norm with max-abs scaling.
double norm2(const Vector& x);

/// ||x||_r with r = 2 (Euclidean) or r = p + 1 (SeparablePower).
double primal_norm(const Vector& x, const PowerParams& params);
/// ||v||_s with s = 2 (Euclidean) or s = q + 1 (SeparablePower).
double dual_norm(const Vector& v, const PowerParams& params);

double phi_value(const Vector& x, const PowerParams& params);
Vector phi_grad(const Vector& x, const PowerParams& params);
double phi_conj_value(const Vector& v, const PowerParams& params);
Vector phi_conj_grad(const Vector& v, const PowerParams& params);

/// (lambda * phi)(x) = lambda^{-p} phi(x).
double epi_scaled_value(const Vector& x, const PowerParams& params);
/// Gradient of lambda * phi, i.e. lambda^{-p} grad phi(x) = grad phi(x / lambda).
Vector epi_scaled_grad(const Vector& x, const PowerParams& params);

/// phi(x) - phi(y) - <grad phi(y), x - y> - 2^{1-p} phi(x - y). Nonnegative
/// up to roundoff for both norm families.
double uniform_convexity_slack(const Vector& x, const Vector& y,
                               const PowerParams& params);

}  // namespace powalm
