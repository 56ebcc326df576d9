#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "giantstep/errors.hpp"
#include "giantstep/hermite.hpp"

using namespace giantstep;

namespace {

double phi0() { return 1.0 / std::sqrt(2.0 * std::numbers::pi); }

// Trapezoid rule on [-12, 12] against the Gaussian density.
template <class F>
double trapezoid_gaussian(F f, int n = 400000) {
  const double a = -12.0, b = 12.0, h = (b - a) / n;
  double s = 0.0;
  for (int i = 0; i <= n; ++i) {
    const double x = a + i * h;
    const double w = (i == 0 || i == n) ? 0.5 : 1.0;
    s += w * f(x) * std::exp(-0.5 * x * x);
  }
  return s * h * phi0();
}

}  // namespace

TEST(HePoly, SmallValues) {
  EXPECT_EQ(he_poly(0, 3.7), 1.0);
  EXPECT_DOUBLE_EQ(he_poly(2, 2.0), 3.0);
  EXPECT_DOUBLE_EQ(he_poly(3, 1.0), -2.0);
}

TEST(HePoly, RecurrenceHoldsToMachinePrecision) {
  std::mt19937_64 gen(3);
  std::uniform_real_distribution<double> u(-5.0, 5.0);
  for (int trial = 0; trial < 200; ++trial) {
    const double x = u(gen);
    for (int k = 1; k < 20; ++k) {
      const double lhs = he_poly(k + 1, x) - x * he_poly(k, x) + k * he_poly(k - 1, x);
      const double scale = std::abs(he_poly(k + 1, x)) + std::abs(x * he_poly(k, x)) +
                           std::abs(k * he_poly(k - 1, x));
      EXPECT_LE(std::abs(lhs), 1e-13 * scale) << "k=" << k << " x=" << x;
    }
  }
}

TEST(HePoly, OrthogonalityMonteCarlo) {
  std::mt19937_64 gen(11);
  std::normal_distribution<double> nd;
  const int n = 1000000;
  std::vector<double> s(81, 0.0), s2(81, 0.0);
  std::vector<double> h(9);
  for (int i = 0; i < n; ++i) {
    const double x = nd(gen);
    for (int k = 0; k <= 8; ++k) h[k] = he_poly(k, x);
    for (int j = 0; j <= 8; ++j)
      for (int k = 0; k <= 8; ++k) {
        const double v = h[j] * h[k];
        s[j * 9 + k] += v;
        s2[j * 9 + k] += v * v;
      }
  }
  for (int j = 0; j <= 8; ++j)
    for (int k = 0; k <= 8; ++k) {
      const double mean = s[j * 9 + k] / n;
      const double se = std::sqrt((s2[j * 9 + k] / n - mean * mean) / n);
      const double expect = j == k ? factorial(k) : 0.0;
      EXPECT_NEAR(mean, expect, 3 * se + 1e-12) << j << "," << k;
    }
}

TEST(HePoly, MonomialCoefficients) {
  EXPECT_EQ(he_monomial_coefficients(3), (std::vector<double>{0, -3, 0, 1}));
  EXPECT_EQ(he_monomial_coefficients(4), (std::vector<double>{3, 0, -6, 0, 1}));
}

TEST(GaussHermite, RuleIntegratesPolynomialsExactly) {
  const auto& rule = gauss_hermite_rule(20);
  double total = 0.0;
  for (double w : rule.weights) total += w;
  EXPECT_NEAR(total, 1.0, 1e-13);
  for (int m = 0; m <= 30; m += 2) {
    double s = 0.0;
    for (int i = 0; i < 20; ++i) s += rule.weights[i] * std::pow(rule.nodes[i], m);
    EXPECT_NEAR(s / gaussian_moment(m), 1.0, 1e-10) << m;
  }
}

TEST(GaussHermite, NonConvergenceIsReported) {
  QuadratureOptions opts;
  opts.nodes = 8;
  opts.max_nodes = 32;
  opts.rel_tol = 1e-14;
  EXPECT_THROW(gaussian_expectation([](double x) { return x > 0.45 ? 1.0 : 0.0; }, opts),
               NumericalError);
}

TEST(HermiteCoeffs, ReluFirstCoefficientIsHalf) {
  const auto s = hermite_coeffs(Activation::relu(), 1);
  EXPECT_NEAR(s[1], 0.5, 1e-8);
}

TEST(HermiteCoeffs, ReluZerothCoefficientFrozen) {
  // 1/sqrt(2 pi), from symbolic integration of x * phi(x) on [0, inf).
  const auto s = hermite_coeffs(Activation::relu(), 0);
  EXPECT_NEAR(s[0], 0.3989422804014327, 1e-12);
}

TEST(HermiteCoeffs, ReluZerothCoefficientMonteCarlo) {
  std::mt19937_64 gen(5);
  std::normal_distribution<double> nd;
  const int n = 10000000;
  double s = 0.0;
  for (int i = 0; i < n; ++i) s += std::max(nd(gen), 0.0);
  EXPECT_NEAR(hermite_coeffs(Activation::relu(), 0)[0], s / n, 5e-4);
}

TEST(HermiteCoeffs, ReluMatchesIntegrationByPartsOracle) {
  // relu'' = delta_0, so mu_k = phi(0) He_{k-2}(0) for k >= 2.
  const auto s = hermite_coeffs(Activation::relu(), 12);
  for (int k = 2; k <= 12; ++k) EXPECT_NEAR(s[k], phi0() * he_poly(k - 2, 0.0), 1e-9) << k;
}

TEST(HermiteCoeffs, HermiteActivationIsOrthogonal) {
  const auto s = hermite_coeffs(Activation::hermite(2), 4);
  const std::vector<double> expect{0, 0, 2, 0, 0};
  for (int k = 0; k <= 4; ++k) EXPECT_NEAR(s[k], expect[k], 1e-14);
}

TEST(HermiteCoeffs, PolynomialKindsVanishAboveDegree) {
  const auto s = hermite_coeffs(Activation::polynomial({1.0, -2.0, 0.5, 3.0}), 9);
  for (int k = 4; k <= 9; ++k) EXPECT_EQ(s[k], 0.0);
}

TEST(HermiteCoeffs, PolynomialReconstruction) {
  const Activation f = Activation::polynomial({0.3, -2.0, 0.5, 3.0, -0.25, 0.1});
  const auto s = hermite_coeffs(f, 5);
  std::mt19937_64 gen(9);
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  for (int i = 0; i < 50; ++i) {
    const double x = u(gen);
    EXPECT_NEAR(s.evaluate(x), f.value(x), 1e-11 * (1 + std::abs(f.value(x))));
  }
}

TEST(HermiteCoeffs, ErfFirstCoefficientClosedForm) {
  // E[erf(x) x] = E[erf'(x)] = 2 / sqrt(3 pi).
  const auto s = hermite_coeffs(Activation::erf(), 3);
  EXPECT_NEAR(s[1], 2.0 / std::sqrt(3.0 * std::numbers::pi), 1e-10);
  EXPECT_NEAR(s[0], 0.0, 1e-14);
  EXPECT_NEAR(s[2], 0.0, 1e-14);
}

TEST(HermiteCoeffs, TanhMatchesTrapezoidOracle) {
  const auto s = hermite_coeffs(Activation::tanh(), 7);
  for (int k = 0; k <= 7; ++k) {
    const double oracle = trapezoid_gaussian([k](double x) { return std::tanh(x) * he_poly(k, x); });
    EXPECT_NEAR(s[k], oracle, 1e-8) << k;
  }
}

TEST(HermiteCoeffs, SumIsAdditive) {
  const auto a = hermite_coeffs(Activation::parse("relu+erf"), 4);
  const auto r = hermite_coeffs(Activation::relu(), 4);
  const auto e = hermite_coeffs(Activation::erf(), 4);
  for (int k = 0; k <= 4; ++k) EXPECT_NEAR(a[k], r[k] + e[k], 1e-14);
}

TEST(LeapIndex1d, Examples) {
  EXPECT_EQ(leap_index_1d(hermite_coeffs(Activation::hermite(2), 6)), 2);
  EXPECT_EQ(leap_index_1d(hermite_coeffs(Activation::relu(), 6)), 1);
  EXPECT_EQ(leap_index_1d(hermite_coeffs(Activation::hermite(3), 6)), 3);
  EXPECT_THROW(leap_index_1d(hermite_coeffs(Activation::polynomial({2.0}), 4)), std::domain_error);
}

TEST(LeapIndex1d, InvariantUnderPositiveScaling) {
  const auto base = hermite_coeffs(Activation::polynomial({0.0, 0.0, 0.0, 1.0, 0.5}), 6);
  for (double c : {1e-3, 0.5, 7.0, 1e3}) {
    HermiteSeries s = base;
    for (double& m : s.coeffs) m *= c;
    EXPECT_EQ(leap_index_1d(s, 1e-8 * c), leap_index_1d(base));
  }
}

TEST(ProductHermiteCoeff, Examples) {
  const Polynomial z1z2 = Polynomial::parse("z1*z2");
  EXPECT_DOUBLE_EQ(product_hermite_coeff(z1z2, {1, 1}), 1.0);
  EXPECT_DOUBLE_EQ(product_hermite_coeff(z1z2, {2, 0}), 0.0);
  EXPECT_DOUBLE_EQ(product_hermite_coeff(Polynomial::parse("z1^2 + z2^2"), {2, 0}), 2.0);
}

TEST(ProductHermiteCoeff, AgreesWithMonteCarlo) {
  const Polynomial g = Polynomial::parse("z1^2 + z2^2");
  std::mt19937_64 gen(17);
  std::normal_distribution<double> nd;
  const int n = 1000000;
  double s = 0, s2 = 0;
  for (int i = 0; i < n; ++i) {
    const double x[2] = {nd(gen), nd(gen)};
    const double v = g.evaluate(x) * he_poly(2, x[0]);
    s += v;
    s2 += v * v;
  }
  const double mean = s / n, se = std::sqrt((s2 / n - mean * mean) / n);
  EXPECT_NEAR(product_hermite_coeff(g, {2, 0}), mean, 3 * se);
}
