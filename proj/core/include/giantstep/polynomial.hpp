#pragma once

#include <map>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

namespace giantstep {

using Exponent = std::vector<int>;

// E[z^k] for z ~ N(0,1): (k-1)!! for even k, 0 for odd k.
double gaussian_moment(int k);

// Sparse polynomial in a fixed number of real variables. Terms with a zero
// coefficient are never stored.
class Polynomial {
 public:
  explicit Polynomial(int num_vars = 0) : num_vars_(num_vars) {}

  static Polynomial constant(int num_vars, double c);
  static Polynomial variable(int num_vars, int index, double coeff = 1.0);
  // Probabilists' Hermite polynomial He_k of variable `index`.
  static Polynomial hermite(int num_vars, int index, int k);
  // Parses expressions like "z1 + 2*z1*z2 - He2(z3)/3 + z1^2". Variables are
  // 1-based (z1..zr). If num_vars is 0 it is inferred from the largest index.
  static Polynomial parse(std::string_view text, int num_vars = 0);

  int num_vars() const { return num_vars_; }
  const std::map<Exponent, double>& terms() const { return terms_; }
  bool is_zero() const { return terms_.empty(); }
  int degree() const;
  double coefficient(const Exponent& e) const;

  void add_term(const Exponent& e, double c);

  double evaluate(const double* x) const;
  double evaluate(const Eigen::VectorXd& x) const { return evaluate(x.data()); }
  // One evaluation per row of X (rows are points in R^num_vars).
  Eigen::VectorXd evaluate_rows(const Eigen::MatrixXd& X) const;

  Polynomial derivative(int var) const;
  // Returns p(Q y) as a polynomial in y, where Q is num_vars × m.
  Polynomial substitute_linear(const Eigen::MatrixXd& Q) const;
  // Exact Gaussian expectation over the variables flagged in `integrate`;
  // the result keeps only the remaining variables, in order.
  Polynomial expectation_over(const std::vector<bool>& integrate) const;
  double expectation() const;
  // Same polynomial viewed with extra trailing variables (or fewer, if the
  // dropped ones do not appear).
  Polynomial with_num_vars(int num_vars) const;
  // Drops terms with |c| <= tol * max|c|.
  Polynomial pruned(double rel_tol) const;
  double max_abs_coefficient() const;

  Polynomial& operator+=(const Polynomial& o);
  Polynomial& operator-=(const Polynomial& o);
  Polynomial& operator*=(double s);
  Polynomial operator*(const Polynomial& o) const;
  Polynomial pow(int k) const;

  std::string to_string() const;

 private:
  int num_vars_;
  std::map<Exponent, double> terms_;
};

inline Polynomial operator+(Polynomial a, const Polynomial& b) { return a += b; }
inline Polynomial operator-(Polynomial a, const Polynomial& b) { return a -= b; }
inline Polynomial operator*(Polynomial a, double s) { return a *= s; }
inline Polynomial operator*(double s, Polynomial a) { return a *= s; }

}  // namespace giantstep
