#include "powalm/power.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace powalm {

const char* to_string(NormFamily norm) {
  return norm == NormFamily::Euclidean ? "euclidean" : "power";
}

double conjugate_exponent(double p) {
  if (!(p >= 1.0) || !std::isfinite(p)) {
    throw std::domain_error("power exponent must satisfy p >= 1, got " + std::to_string(p));
  }
  return 1.0 / p;
}

PowerParams::PowerParams(double p, double lambda, NormFamily norm)
    : PowerParams(p, conjugate_exponent(p), lambda, norm) {}

PowerParams::PowerParams(double p, double q, double lambda, NormFamily norm)
    : p_(p), q_(conjugate_exponent(p)), lambda_(lambda), norm_(norm) {
  if (std::abs(q - q_) > 1e-12 * q_) {
    throw std::invalid_argument("inconsistent conjugate pair: q must equal 1/p");
  }
  if (!(lambda > 0.0) || !std::isfinite(lambda)) {
    throw std::invalid_argument("lambda must be positive and finite");
  }
}

PowerParams PowerParams::from_dual_power(double q, double lambda, NormFamily norm) {
  if (!(q > 0.0 && q <= 1.0)) {
    throw std::domain_error("dual exponent must satisfy 0 < q <= 1");
  }
  return PowerParams(1.0 / q, lambda, norm);
}

PowerParams PowerParams::with_lambda(double lambda) const {
  return PowerParams(p_, q_, lambda, norm_);
}

double abs_pow(double t, double alpha) {
  const double a = std::abs(t);
  if (alpha == 0.0) return 1.0;
  if (a < 1e-300) return 0.0;
  if (alpha == 1.0) return a;
  if (alpha == 2.0) return a * a;
  return std::exp(alpha * std::log(a));
}

double norm2(const Vector& x) {
  const double scale = x.size() > 0 ? x.cwiseAbs().maxCoeff() : 0.0;
  if (scale == 0.0 || !std::isfinite(scale)) return scale;
  return scale * (x / scale).norm();
}

namespace {

double power_sum(const Vector& x, double r) {
  double acc = 0.0;
  for (Eigen::Index i = 0; i < x.size(); ++i) acc += abs_pow(x[i], r);
  return acc;
}

Vector signed_power(const Vector& x, double alpha) {
  Vector out(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double m = abs_pow(x[i], alpha);
    out[i] = x[i] < 0.0 ? -m : (x[i] > 0.0 ? m : 0.0);
  }
  return out;
}

// Euclidean: ||x||^{alpha - 1} x, exactly 0 at x = 0.
Vector radial_power(const Vector& x, double alpha) {
  const double n = norm2(x);
  if (n == 0.0) return Vector::Zero(x.size());
  return abs_pow(n, alpha - 1.0) * x;
}

}  // namespace

double primal_norm(const Vector& x, const PowerParams& params) {
  if (params.norm() == NormFamily::Euclidean) return norm2(x);
  const double r = params.p() + 1.0;
  return abs_pow(power_sum(x, r), 1.0 / r);
}

double dual_norm(const Vector& v, const PowerParams& params) {
  if (params.norm() == NormFamily::Euclidean) return norm2(v);
  const double s = params.q() + 1.0;
  return abs_pow(power_sum(v, s), 1.0 / s);
}

double phi_value(const Vector& x, const PowerParams& params) {
  const double r = params.p() + 1.0;
  if (params.norm() == NormFamily::Euclidean) return abs_pow(norm2(x), r) / r;
  return power_sum(x, r) / r;
}

Vector phi_grad(const Vector& x, const PowerParams& params) {
  if (params.norm() == NormFamily::Euclidean) return radial_power(x, params.p());
  return signed_power(x, params.p());
}

double phi_conj_value(const Vector& v, const PowerParams& params) {
  const double s = params.q() + 1.0;
  if (params.norm() == NormFamily::Euclidean) return abs_pow(norm2(v), s) / s;
  return power_sum(v, s) / s;
}

Vector phi_conj_grad(const Vector& v, const PowerParams& params) {
  if (params.norm() == NormFamily::Euclidean) return radial_power(v, params.q());
  return signed_power(v, params.q());
}

double epi_scaled_value(const Vector& x, const PowerParams& params) {
  return abs_pow(params.lambda(), -params.p()) * phi_value(x, params);
}

Vector epi_scaled_grad(const Vector& x, const PowerParams& params) {
  return abs_pow(params.lambda(), -params.p()) * phi_grad(x, params);
}

double uniform_convexity_slack(const Vector& x, const Vector& y, const PowerParams& params) {
  const Vector d = x - y;
  return phi_value(x, params) - phi_value(y, params) - phi_grad(y, params).dot(d) -
         std::exp2(1.0 - params.p()) * phi_value(d, params);
}

}  // namespace powalm
