#include "giantstep/hermite.hpp"

#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <stdexcept>

#include "giantstep/errors.hpp"

namespace giantstep {

double factorial(int k) {
  if (k < 0) throw std::invalid_argument("factorial of negative number");
  double f = 1.0;
  for (int i = 2; i <= k; ++i) f *= i;
  return f;
}

double he_poly(int k, double x) {
  if (k < 0) throw std::invalid_argument("he_poly: negative order");
  if (k == 0) return 1.0;
  double prev = 1.0, cur = x;
  for (int j = 1; j < k; ++j) {
    double next = x * cur - j * prev;
    prev = cur;
    cur = next;
  }
  return cur;
}

std::vector<double> he_monomial_coefficients(int k) {
  if (k < 0) throw std::invalid_argument("negative Hermite order");
  std::vector<double> prev{1.0};
  if (k == 0) return prev;
  std::vector<double> cur{0.0, 1.0};
  for (int j = 1; j < k; ++j) {
    std::vector<double> next(j + 2, 0.0);
    for (int m = 0; m <= j; ++m) next[m + 1] += cur[m];
    for (int m = 0; m < j; ++m) next[m] -= j * prev[m];
    prev = std::move(cur);
    cur = std::move(next);
  }
  return cur;
}

double HermiteSeries::evaluate(double x) const {
  double s = 0.0;
  for (int k = 0; k <= kmax(); ++k) s += coeffs[k] / factorial(k) * he_poly(k, x);
  return s;
}

// m! / (j! 2^j) with j = (m - k) / 2, zero unless m >= k and m - k is even.
double monomial_hermite_moment(int m, int k) {
  if (m < k || (m - k) % 2 != 0) return 0.0;
  const int j = (m - k) / 2;
  return factorial(m) / (factorial(j) * std::ldexp(1.0, j));
}

namespace {

// E[x^j 1{x > 0}] for x ~ N(0,1).
double half_line_moment(int j) {
  if (j % 2 == 0) return 0.5 * gaussian_moment(j);
  const int h = (j - 1) / 2;
  return std::ldexp(1.0, h) * factorial(h) / std::sqrt(2.0 * std::numbers::pi);
}

GaussHermiteRule build_rule(int n) {
  Eigen::VectorXd diag = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd sub(std::max(n - 1, 0));
  for (int k = 1; k < n; ++k) sub(k - 1) = std::sqrt(static_cast<double>(k));
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
  es.computeFromTridiagonal(diag, sub, Eigen::ComputeEigenvectors);
  if (es.info() != Eigen::Success) throw NumericalError("Gauss-Hermite eigen solve failed");
  GaussHermiteRule rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  for (int i = 0; i < n; ++i) {
    rule.nodes[i] = es.eigenvalues()(i);
    rule.weights[i] = es.eigenvectors()(0, i) * es.eigenvectors()(0, i);
  }
  return rule;
}

std::vector<double> quadrature_coeffs(const Activation& f, int kmax,
                                      const QuadratureOptions& opts) {
  auto eval = [&](int n) {
    const auto& rule = gauss_hermite_rule(n);
    std::vector<double> mu(kmax + 2, 0.0);  // last slot holds E[f^2]
    for (int i = 0; i < n; ++i) {
      const double x = rule.nodes[i], w = rule.weights[i] * f.value(x);
      double prev = 1.0, cur = x;
      mu[0] += w;
      if (kmax >= 1) mu[1] += w * x;
      for (int k = 1; k < kmax; ++k) {
        double next = x * cur - k * prev;
        prev = cur;
        cur = next;
        mu[k + 1] += w * cur;
      }
      mu[kmax + 1] += w * f.value(x);
    }
    return mu;
  };
  int n = opts.nodes;
  std::vector<double> lo = eval(n);
  while (true) {
    if (2 * n > opts.max_nodes)
      throw NumericalError("Gauss-Hermite quadrature for " + f.name() +
                           " did not converge within " + std::to_string(opts.max_nodes) +
                           " nodes");
    std::vector<double> hi = eval(2 * n);
    const double norm = std::sqrt(std::max(hi[kmax + 1], 0.0));
    bool ok = true;
    for (int k = 0; k <= kmax && ok; ++k) {
      // |mu_k| <= sqrt(k!) ||f|| sets the natural scale of each coefficient.
      const double scale = std::max(std::abs(hi[k]), std::sqrt(factorial(k)) * norm);
      ok = std::abs(hi[k] - lo[k]) <= opts.rel_tol * scale;
    }
    if (ok) {
      hi.pop_back();
      return hi;
    }
    lo = std::move(hi);
    n *= 2;
  }
}

}  // namespace

const GaussHermiteRule& gauss_hermite_rule(int n) {
  if (n < 1) throw std::invalid_argument("Gauss-Hermite rule needs n >= 1");
  static std::mutex mu;
  static std::map<int, std::unique_ptr<GaussHermiteRule>> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto& slot = cache[n];
  if (!slot) slot = std::make_unique<GaussHermiteRule>(build_rule(n));
  return *slot;
}

double gaussian_expectation(const std::function<double(double)>& f,
                            const QuadratureOptions& opts, double scale) {
  auto eval = [&](int n) {
    const auto& rule = gauss_hermite_rule(n);
    double s = 0.0;
    for (int i = 0; i < n; ++i) s += rule.weights[i] * f(rule.nodes[i]);
    return s;
  };
  int n = opts.nodes;
  double lo = eval(n);
  while (2 * n <= opts.max_nodes) {
    double hi = eval(2 * n);
    if (std::abs(hi - lo) <= opts.rel_tol * std::max(scale, std::abs(hi))) return hi;
    lo = hi;
    n *= 2;
  }
  throw NumericalError("Gauss-Hermite quadrature did not converge within " +
                       std::to_string(opts.max_nodes) + " nodes");
}

HermiteSeries hermite_coeffs(const Activation& f, int kmax, const QuadratureOptions& opts) {
  if (kmax < 0) throw std::invalid_argument("hermite_coeffs: kmax must be >= 0");
  HermiteSeries out;
  out.coeffs.assign(kmax + 1, 0.0);
  if (f.is_polynomial()) {
    const auto c = f.monomial_coefficients();
    for (int k = 0; k <= kmax; ++k)
      for (std::size_t m = 0; m < c.size(); ++m)
        if (c[m] != 0.0) out.coeffs[k] += c[m] * monomial_hermite_moment(static_cast<int>(m), k);
    return out;
  }
  switch (f.kind()) {
    case Activation::Kind::relu:
      // relu(x) = x 1{x>0}: integrate He_k(x) x on the half line exactly.
      for (int k = 0; k <= kmax; ++k) {
        const auto h = he_monomial_coefficients(k);
        double s = 0.0;
        for (std::size_t m = 0; m < h.size(); ++m)
          if (h[m] != 0.0) s += h[m] * half_line_moment(static_cast<int>(m) + 1);
        out.coeffs[k] = s;
      }
      return out;
    case Activation::Kind::sum:
      for (const auto& part : f.parts()) {
        auto s = hermite_coeffs(part, kmax, opts);
        for (int k = 0; k <= kmax; ++k) out.coeffs[k] += s.coeffs[k];
      }
      return out;
    default:
      out.coeffs = quadrature_coeffs(f, kmax, opts);
      return out;
  }
}

int leap_index_1d(const HermiteSeries& series, double tol) {
  for (int k = 1; k <= series.kmax(); ++k)
    if (std::abs(series.coeffs[k]) > tol) return k;
  throw std::domain_error("no finite leap: all Hermite coefficients with k >= 1 are below tolerance");
}

double product_hermite_coeff(const Polynomial& g, const std::vector<int>& j) {
  if (static_cast<int>(j.size()) != g.num_vars())
    throw std::invalid_argument("product_hermite_coeff: index length != num_vars");
  double total = 0.0;
  for (const auto& [e, c] : g.terms()) {
    double t = c;
    for (std::size_t i = 0; i < j.size() && t != 0.0; ++i)
      t *= monomial_hermite_moment(e[i], j[i]);
    total += t;
  }
  return total;
}

Activation truncated_hermite_activation(const HermiteSeries& series) {
  std::vector<double> c(series.coeffs.size(), 0.0);
  for (int k = 0; k <= series.kmax(); ++k) {
    const auto h = he_monomial_coefficients(k);
    const double w = series.coeffs[k] / factorial(k);
    for (std::size_t m = 0; m < h.size(); ++m) c[m] += w * h[m];
  }
  return Activation::polynomial(std::move(c));
}

}  // namespace giantstep
