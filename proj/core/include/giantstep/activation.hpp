#pragma once

#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

namespace giantstep {

// Scalar activation / link component. Polynomial kinds (identity, hermite,
// polynomial, and sums of those) support exact Hermite expansions.
class Activation {
 public:
  enum class Kind { relu, erf, tanh, identity, hermite, polynomial, sum };

  static Activation relu() { return Activation(Kind::relu); }
  // erf(scale * x)
  static Activation erf(double scale = 1.0);
  static Activation tanh() { return Activation(Kind::tanh); }
  static Activation identity() { return Activation(Kind::identity); }
  static Activation hermite(int k);
  // sum_m coeffs[m] x^m
  static Activation polynomial(std::vector<double> monomial_coeffs);
  static Activation sum(std::vector<Activation> parts);
  // Accepts "relu", "erf", "tanh", "identity", "he3", "poly(1,0,-1)",
  // and '+'-joined sums such as "relu+erf".
  static Activation parse(std::string_view text);

  Kind kind() const { return kind_; }
  int hermite_order() const { return order_; }
  double scale() const { return scale_; }
  const std::vector<Activation>& parts() const { return parts_; }

  double value(double x) const;
  double derivative(double x) const;
  Eigen::ArrayXXd apply(const Eigen::ArrayXXd& x) const;
  Eigen::ArrayXXd apply_derivative(const Eigen::ArrayXXd& x) const;

  bool is_polynomial() const;
  // Monomial coefficients c_0..c_D; only valid when is_polynomial().
  std::vector<double> monomial_coefficients() const;

  std::string name() const;

 private:
  explicit Activation(Kind k) : kind_(k) {}

  Kind kind_;
  int order_ = 0;
  double scale_ = 1.0;
  std::vector<double> coeffs_;
  std::vector<Activation> parts_;
};

}  // namespace giantstep
