#pragma once

#include <vector>

#include <Eigen/Dense>

#include "giantstep/polynomial.hpp"
#include "giantstep/subspace.hpp"

namespace giantstep {

// An r-vector whose entries are polynomials in dim(U) parameters lambda
// (coordinates of x in the basis of U).
struct ParamVectorPolynomial {
  std::vector<Polynomial> entries;
  int num_params = 0;

  int dim() const { return static_cast<int>(entries.size()); }
  // One r-vector per lambda-monomial, in a deterministic monomial order.
  std::vector<Eigen::VectorXd> coefficient_vectors() const;
  bool is_zero(double abs_tol = 0.0) const;
  Eigen::VectorXd evaluate(const Eigen::VectorXd& lambda) const;
};

// E_{x_perp}[grad_{x_perp} g(x + x_perp)] for x = B lambda in U, expressed in
// the teacher basis. Components along U are zero by construction.
ParamVectorPolynomial conditional_first_hermite(const Polynomial& g, const Subspace& U);

// E[g(z) | P_U z = B lambda] as a polynomial in lambda.
Polynomial conditional_mean(const Polynomial& g, const Subspace& U);

// U_0 = {0}, U_{t+1} = U_t + span of the coefficient vectors of
// conditional_first_hermite(g, U_t). Always returns t_max + 1 subspaces;
// after stabilization the last one is repeated.
std::vector<Subspace> staircase_sequence(const Polynomial& g, int t_max = 8);

// Span of all directions g depends on (coefficient vectors of grad g).
Subspace relevant_subspace(const Polynomial& g);

bool is_staircase_learnable(const Polynomial& g, int t_max = 8);

// Number of new directions one staircase step adds to U.
int multi_direction_step_check(const Polynomial& g, const Subspace& U);

}  // namespace giantstep
