#include "giantstep/staircase.hpp"

#include <map>
#include <stdexcept>

namespace giantstep {

namespace {

constexpr double kDropTol = 1e-10;

// Coefficients below this fraction of the link's largest coefficient are
// treated as floating-point residue of the rotation.
constexpr double kResidueTol = 1e-12;

Eigen::MatrixXd rotation_for(const Subspace& U) {
  Eigen::MatrixXd Q(U.ambient(), U.ambient());
  Q << U.basis(), U.complement();
  return Q;
}

std::vector<Eigen::VectorXd> significant(const std::vector<Eigen::VectorXd>& vs, double scale) {
  std::vector<Eigen::VectorXd> out;
  for (const auto& v : vs)
    if (v.norm() > kDropTol * scale) out.push_back(v);
  return out;
}

}  // namespace

std::vector<Eigen::VectorXd> ParamVectorPolynomial::coefficient_vectors() const {
  std::map<Exponent, Eigen::VectorXd> by_monomial;
  for (int i = 0; i < dim(); ++i)
    for (const auto& [e, c] : entries[i].terms()) {
      auto it = by_monomial.find(e);
      if (it == by_monomial.end())
        it = by_monomial.emplace(e, Eigen::VectorXd::Zero(dim())).first;
      it->second(i) += c;
    }
  std::vector<Eigen::VectorXd> out;
  for (auto& [e, v] : by_monomial) out.push_back(std::move(v));
  return out;
}

bool ParamVectorPolynomial::is_zero(double abs_tol) const {
  for (const auto& p : entries)
    if (p.max_abs_coefficient() > abs_tol) return false;
  return true;
}

Eigen::VectorXd ParamVectorPolynomial::evaluate(const Eigen::VectorXd& lambda) const {
  if (lambda.size() != num_params) throw std::invalid_argument("lambda has wrong size");
  Eigen::VectorXd out(dim());
  for (int i = 0; i < dim(); ++i) out(i) = entries[i].evaluate(lambda.data());
  return out;
}

ParamVectorPolynomial conditional_first_hermite(const Polynomial& g, const Subspace& U) {
  const int r = g.num_vars();
  if (U.ambient() != r) throw std::invalid_argument("subspace ambient dimension != num_vars");
  const int k = U.dim();
  const Eigen::MatrixXd Q = rotation_for(U);
  const double scale = g.max_abs_coefficient();
  const Polynomial rotated = g.substitute_linear(Q).pruned(kResidueTol);
  std::vector<bool> integrate(r, false);
  for (int j = k; j < r; ++j) integrate[j] = true;

  ParamVectorPolynomial out;
  out.num_params = k;
  out.entries.assign(r, Polynomial(k));
  for (int j = k; j < r; ++j) {
    const Polynomial dj = rotated.derivative(j).expectation_over(integrate);
    for (int i = 0; i < r; ++i)
      if (Q(i, j) != 0.0) out.entries[i] += dj * Q(i, j);
  }
  for (auto& e : out.entries) {
    Polynomial cleaned(k);
    for (const auto& [ex, c] : e.terms())
      if (std::abs(c) > kResidueTol * scale) cleaned.add_term(ex, c);
    e = std::move(cleaned);
  }
  return out;
}

Polynomial conditional_mean(const Polynomial& g, const Subspace& U) {
  const int r = g.num_vars();
  if (U.ambient() != r) throw std::invalid_argument("subspace ambient dimension != num_vars");
  const Eigen::MatrixXd Q = rotation_for(U);
  std::vector<bool> integrate(r, false);
  for (int j = U.dim(); j < r; ++j) integrate[j] = true;
  return g.substitute_linear(Q).pruned(kResidueTol).expectation_over(integrate);
}

std::vector<Subspace> staircase_sequence(const Polynomial& g, int t_max) {
  if (t_max < 0) throw std::invalid_argument("t_max must be >= 0");
  const double scale = g.max_abs_coefficient();
  std::vector<Subspace> seq{Subspace(g.num_vars())};
  bool stable = false;
  for (int t = 0; t < t_max; ++t) {
    Subspace next = seq.back();
    if (!stable) {
      const auto mu = conditional_first_hermite(g, next);
      stable = next.extend(significant(mu.coefficient_vectors(), scale), kDropTol) == 0;
    }
    seq.push_back(std::move(next));
  }
  return seq;
}

Subspace relevant_subspace(const Polynomial& g) {
  ParamVectorPolynomial grad;
  grad.num_params = g.num_vars();
  for (int i = 0; i < g.num_vars(); ++i) grad.entries.push_back(g.derivative(i));
  Subspace s(g.num_vars());
  s.extend(significant(grad.coefficient_vectors(), g.max_abs_coefficient()), kDropTol);
  return s;
}

bool is_staircase_learnable(const Polynomial& g, int t_max) {
  return staircase_sequence(g, t_max).back().dim() == relevant_subspace(g).dim();
}

int multi_direction_step_check(const Polynomial& g, const Subspace& U) {
  Subspace next = U;
  const auto mu = conditional_first_hermite(g, U);
  return next.extend(significant(mu.coefficient_vectors(), g.max_abs_coefficient()), kDropTol);
}

}  // namespace giantstep
