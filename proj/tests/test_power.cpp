#include <gtest/gtest.h>

#include <cmath>

#include "powalm/power.hpp"
#include "powalm/rng.hpp"

using powalm::NormFamily;
using powalm::PowerParams;
using powalm::Vector;

namespace {

Vector vec(std::initializer_list<double> v) {
  Vector out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out[i++] = x;
  return out;
}

constexpr NormFamily kEuclid = NormFamily::Euclidean;
constexpr NormFamily kSep = NormFamily::SeparablePower;

}  // namespace

TEST(ConjugateExponent, KnownPairs) {
  EXPECT_DOUBLE_EQ(powalm::conjugate_exponent(1.0), 1.0);
  EXPECT_DOUBLE_EQ(powalm::conjugate_exponent(2.0), 0.5);
  EXPECT_NEAR(PowerParams::from_dual_power(0.7, 1.0).p(), 1.0 / 0.7, 1e-15);
  EXPECT_NEAR(PowerParams::from_dual_power(0.7, 1.0).p(), 1.428571, 1e-6);
  EXPECT_THROW(powalm::conjugate_exponent(0.5), std::domain_error);
}

TEST(PowerParams, RejectsNonConjugatePair) {
  EXPECT_NO_THROW(PowerParams(2.0, 0.5, 1.0, kEuclid));
  EXPECT_THROW(PowerParams(2.0, 0.6, 1.0, kEuclid), std::invalid_argument);
}

TEST(PhiValue, Examples) {
  EXPECT_EQ(powalm::phi_value(Vector::Zero(3), PowerParams(1.7, 0.3, kSep)), 0.0);
  EXPECT_DOUBLE_EQ(powalm::phi_value(vec({3, 4}), PowerParams(1.0, 1.0, kEuclid)), 12.5);
  EXPECT_DOUBLE_EQ(powalm::phi_value(vec({2, -1}), PowerParams(2.0, 1.0, kSep)), 3.0);
}

TEST(PhiGrad, Examples) {
  const Vector g = powalm::phi_grad(vec({3, 4}), PowerParams(2.0, 1.0, kEuclid));
  EXPECT_NEAR(g[0], 15.0, 1e-13);
  EXPECT_NEAR(g[1], 20.0, 1e-13);
  const Vector h = powalm::phi_grad(vec({2, -1}), PowerParams(2.0, 1.0, kSep));
  EXPECT_DOUBLE_EQ(h[0], 4.0);
  EXPECT_DOUBLE_EQ(h[1], -1.0);
  EXPECT_TRUE(powalm::phi_grad(Vector::Zero(2), PowerParams(3.0, 1.0, kEuclid)).isZero(0.0));
}

TEST(PhiConj, Examples) {
  EXPECT_EQ(powalm::phi_conj_value(Vector::Zero(2), PowerParams(2.0, 1.0, kEuclid)), 0.0);
  EXPECT_DOUBLE_EQ(powalm::phi_conj_value(vec({3, 4}), PowerParams(1.0, 1.0, kEuclid)), 12.5);
  EXPECT_NEAR(powalm::phi_conj_value(vec({4, -9}), PowerParams(2.0, 1.0, kSep)), 35.0 / 1.5,
              1e-12);

  EXPECT_TRUE(powalm::phi_conj_grad(Vector::Zero(2), PowerParams(2.0, 1.0, kSep)).isZero(0.0));
  const Vector unit = vec({0.6, -0.8});
  for (double p : {1.0, 1.5, 2.0, 3.0}) {
    EXPECT_LT((powalm::phi_conj_grad(unit, PowerParams(p, 1.0, kEuclid)) - unit).norm(), 1e-15);
  }
  const Vector g = powalm::phi_conj_grad(vec({4, -9}), PowerParams(2.0, 1.0, kSep));
  EXPECT_NEAR(g[0], 2.0, 1e-14);
  EXPECT_NEAR(g[1], -3.0, 1e-14);
}

TEST(EpiScaled, Examples) {
  const Vector x = vec({0.3, -2.0, 1.1});
  for (auto norm : {kEuclid, kSep}) {
    const PowerParams params(1.5, 1.0, norm);
    EXPECT_DOUBLE_EQ(powalm::epi_scaled_value(x, params), powalm::phi_value(x, params));
  }
  EXPECT_DOUBLE_EQ(powalm::epi_scaled_value(vec({3, 4}), PowerParams(1.0, 2.0, kEuclid)), 6.25);
  EXPECT_DOUBLE_EQ(powalm::epi_scaled_value(vec({2, -1}), PowerParams(2.0, 0.5, kSep)), 12.0);
}

TEST(EpiScaled, GradientMatchesFiniteDifferences) {
  powalm::Rng rng(7, 1);
  for (auto norm : {kEuclid, kSep}) {
    const PowerParams params(1.7, 0.4, norm);
    const Vector x = rng.normal_vector(4);
    const Vector g = powalm::epi_scaled_grad(x, params);
    for (Eigen::Index i = 0; i < 4; ++i) {
      Vector e = Vector::Zero(4);
      e[i] = 1e-6;
      const double fd = (powalm::epi_scaled_value(x + e, params) -
                         powalm::epi_scaled_value(x - e, params)) / 2e-6;
      EXPECT_NEAR(g[i], fd, 1e-6 * (1.0 + std::abs(fd)));
    }
  }
}

TEST(UniformConvexity, QuadraticCaseIsExact) {
  powalm::Rng rng(3, 1);
  const PowerParams params(1.0, 1.0, kEuclid);
  for (int i = 0; i < 100; ++i) {
    const Vector x = rng.normal_vector(5);
    const Vector y = rng.normal_vector(5);
    EXPECT_NEAR(powalm::uniform_convexity_slack(x, y, params), 0.0,
                1e-13 * (1.0 + x.squaredNorm() + y.squaredNorm()));
    EXPECT_EQ(powalm::uniform_convexity_slack(x, x, params), 0.0);
  }
}

// Values from tests/oracles/uc_slack.py (50-digit evaluation).
TEST(UniformConvexity, MatchesExtendedPrecision) {
  const Vector xs[] = {vec({0.3, -1.2, 2.0}), vec({-2.5, 0.0, 0.75}), vec({1.0, 2.0, 3.0})};
  const Vector ys[] = {vec({1.1, 0.4, -0.7}), vec({0.2, 0.2, 0.2}), vec({-1.0, 0.5, 2.5})};
  const double euclid[] = {2.4772774038047649744, 2.5616233513510500925, 7.8525669329343915982};
  const double sep[] = {1.1708333333333334499, 2.1253958333333333048, 3.0};
  for (int i = 0; i < 3; ++i) {
    EXPECT_NEAR(powalm::uniform_convexity_slack(xs[i], ys[i], PowerParams(2.0, 1.0, kEuclid)),
                euclid[i], 1e-13 * euclid[i]);
    EXPECT_NEAR(powalm::uniform_convexity_slack(xs[i], ys[i], PowerParams(2.0, 1.0, kSep)),
                sep[i], 1e-13 * sep[i]);
  }
}

TEST(Norms, DualPairing) {
  powalm::Rng rng(11, 1);
  for (auto norm : {kEuclid, kSep}) {
    const PowerParams params(1.6, 1.0, norm);
    for (int i = 0; i < 50; ++i) {
      const Vector x = rng.normal_vector(6);
      const Vector v = rng.normal_vector(6);
      EXPECT_LE(std::abs(x.dot(v)),
                powalm::primal_norm(x, params) * powalm::dual_norm(v, params) * (1 + 1e-14));
    }
  }
}

TEST(AbsPow, Branches) {
  EXPECT_EQ(powalm::abs_pow(-3.0, 2.0), 9.0);
  EXPECT_EQ(powalm::abs_pow(-3.0, 1.0), 3.0);
  EXPECT_EQ(powalm::abs_pow(-3.0, 0.0), 1.0);
  EXPECT_EQ(powalm::abs_pow(1e-301, 1.5), 0.0);
  EXPECT_NEAR(powalm::abs_pow(2.0, 0.5), std::sqrt(2.0), 1e-15);
}

// First draws from tests/oracles/rng_streams.py.
TEST(Rng, MatchesReferenceStream) {
  powalm::Rng a(0, 1);
  EXPECT_EQ(a.next_u64(), 0xaa2b23c3b2ad4d69ULL);
  EXPECT_EQ(a.next_u64(), 0xd33c88380fcdf866ULL);
  EXPECT_EQ(a.next_u64(), 0xde82c3e9562dd132ULL);
  EXPECT_EQ(a.next_u64(), 0xe38fa1da7e8f0d8dULL);
  powalm::Rng b(42, 7);
  EXPECT_EQ(b.next_u64(), 0xab888623d78bb721ULL);
  EXPECT_EQ(b.next_u64(), 0x6df27a4348e0cfacULL);
  powalm::Rng c(42, 7);
  EXPECT_EQ(c.uniform(), 0.67005194068001006);
  EXPECT_EQ(c.uniform(), 0.42948116438572292);
}

TEST(Rng, UniformIntStaysInRange) {
  powalm::Rng rng(5, 2);
  for (int i = 0; i < 1000; ++i) {
    const auto v = rng.uniform_int(-3, 4);
    EXPECT_GE(v, -3);
    EXPECT_LE(v, 4);
  }
}
