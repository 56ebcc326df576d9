#pragma once

#include <functional>
#include <vector>

#include "giantstep/activation.hpp"
#include "giantstep/polynomial.hpp"

// Convention: f = sum_k (mu_k / k!) He_k with mu_k = E[f He_k], He_k the
// probabilists' Hermite polynomials (E[He_j He_k] = k! delta_jk).
//
// Multivariate tensors use the same scalar convention. For an index tuple
// i in [r]^k with multiplicity pattern alpha (alpha_j = #{m : i_m = j}),
//   C_k[i] = E[g(z) prod_j He_{alpha_j}(z_j)] / sqrt(k!).
// The orthonormal tensor basis H_{k,i} = prod_j He_{alpha_j}(z_j) / sqrt(k!)
// satisfies <H_{k,i}, H_{k,i}> = alpha! / k! = 1 / (number of distinct
// permutations of i), which makes
//   g = sum_k <C_k, H_k>  and  E[g^2] = sum_k ||C_k||_F^2.
// For g(z) = sigma(<w, z>) this gives C_k = mu_k(sigma) / sqrt(k!) w^{(x)k}.

namespace giantstep {

double factorial(int k);

double he_poly(int k, double x);
// Monomial coefficients of He_k (index m holds the x^m coefficient).
std::vector<double> he_monomial_coefficients(int k);
// E[x^m He_k(x)] for x ~ N(0,1).
double monomial_hermite_moment(int m, int k);

struct HermiteSeries {
  std::vector<double> coeffs;  // mu_0..mu_K

  int kmax() const { return static_cast<int>(coeffs.size()) - 1; }
  double operator[](int k) const { return coeffs.at(k); }
  // sum_k mu_k / k! He_k(x)
  double evaluate(double x) const;
};

struct QuadratureOptions {
  int nodes = 200;
  double rel_tol = 1e-10;
  int max_nodes = 800;
};

// Gauss-Hermite rule for the standard Gaussian weight (weights sum to 1).
struct GaussHermiteRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};
const GaussHermiteRule& gauss_hermite_rule(int n);

// E[f(z)], z ~ N(0,1), with adaptive node doubling. Throws NumericalError
// when successive rules disagree beyond rel_tol * scale.
double gaussian_expectation(const std::function<double(double)>& f,
                            const QuadratureOptions& opts = {}, double scale = 1.0);

HermiteSeries hermite_coeffs(const Activation& f, int kmax,
                             const QuadratureOptions& opts = {});

// Smallest k >= 1 with |mu_k| > tol. Throws std::domain_error if none.
int leap_index_1d(const HermiteSeries& series, double tol = 1e-8);

// E[g(z) prod_i He_{j_i}(z_i)], z ~ N(0, I_r), exact via Gaussian moments.
double product_hermite_coeff(const Polynomial& g, const std::vector<int>& j);

// The monomial expansion of sum_k mu_k / k! He_k, as an Activation.
Activation truncated_hermite_activation(const HermiteSeries& series);

}  // namespace giantstep
