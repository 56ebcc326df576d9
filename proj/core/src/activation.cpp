#include "giantstep/activation.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "giantstep/hermite.hpp"

namespace giantstep {

namespace {

std::string trim(std::string_view s) {
  std::size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return std::string(s.substr(a, b - a));
}

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

Eigen::ArrayXXd horner(const std::vector<double>& c, const Eigen::ArrayXXd& x) {
  Eigen::ArrayXXd out = Eigen::ArrayXXd::Zero(x.rows(), x.cols());
  for (auto it = c.rbegin(); it != c.rend(); ++it) out = out * x + *it;
  return out;
}

double horner(const std::vector<double>& c, double x) {
  double out = 0.0;
  for (auto it = c.rbegin(); it != c.rend(); ++it) out = out * x + *it;
  return out;
}

std::vector<double> differentiate(const std::vector<double>& c) {
  std::vector<double> d;
  for (std::size_t m = 1; m < c.size(); ++m) d.push_back(c[m] * static_cast<double>(m));
  return d;
}

}  // namespace

Activation Activation::erf(double scale) {
  Activation a(Kind::erf);
  a.scale_ = scale;
  return a;
}

Activation Activation::hermite(int k) {
  if (k < 0) throw std::invalid_argument("hermite activation order must be >= 0");
  Activation a(Kind::hermite);
  a.order_ = k;
  return a;
}

Activation Activation::polynomial(std::vector<double> monomial_coeffs) {
  Activation a(Kind::polynomial);
  while (!monomial_coeffs.empty() && monomial_coeffs.back() == 0.0) monomial_coeffs.pop_back();
  a.coeffs_ = std::move(monomial_coeffs);
  return a;
}

Activation Activation::sum(std::vector<Activation> parts) {
  if (parts.empty()) throw std::invalid_argument("empty activation sum");
  if (parts.size() == 1) return parts.front();
  Activation a(Kind::sum);
  a.parts_ = std::move(parts);
  return a;
}

Activation Activation::parse(std::string_view text) {
  const std::string s = lower(trim(text));
  if (s.empty()) throw std::invalid_argument("empty activation name");
  // Split on top-level '+'.
  std::vector<std::string> pieces;
  int depth = 0;
  std::size_t start = 0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] == '(') ++depth;
    if (s[i] == ')') --depth;
    if (s[i] == '+' && depth == 0) {
      pieces.push_back(trim(std::string_view(s).substr(start, i - start)));
      start = i + 1;
    }
  }
  pieces.push_back(trim(std::string_view(s).substr(start)));
  if (pieces.size() > 1) {
    std::vector<Activation> parts;
    for (const auto& p : pieces) parts.push_back(parse(p));
    return sum(std::move(parts));
  }
  if (s == "relu") return relu();
  if (s == "erf") return erf();
  if (s == "tanh") return tanh();
  if (s == "identity" || s == "linear") return identity();
  if (s.rfind("he", 0) == 0 && s.size() > 2 &&
      std::all_of(s.begin() + 2, s.end(), [](unsigned char c) { return std::isdigit(c); }))
    return hermite(std::stoi(s.substr(2)));
  if (s.rfind("hermite(", 0) == 0 && s.back() == ')')
    return hermite(std::stoi(s.substr(8, s.size() - 9)));
  if (s.rfind("poly(", 0) == 0 && s.back() == ')') {
    std::vector<double> c;
    std::stringstream ss(s.substr(5, s.size() - 6));
    std::string item;
    while (std::getline(ss, item, ',')) c.push_back(std::stod(item));
    return polynomial(std::move(c));
  }
  throw std::invalid_argument("unknown activation '" + std::string(text) + "'");
}

double Activation::value(double x) const {
  switch (kind_) {
    case Kind::relu: return x > 0.0 ? x : 0.0;
    case Kind::erf: return std::erf(scale_ * x);
    case Kind::tanh: return std::tanh(x);
    case Kind::identity: return x;
    case Kind::hermite: return he_poly(order_, x);
    case Kind::polynomial: return horner(coeffs_, x);
    case Kind::sum: {
      double s = 0.0;
      for (const auto& p : parts_) s += p.value(x);
      return s;
    }
  }
  return 0.0;
}

double Activation::derivative(double x) const {
  switch (kind_) {
    case Kind::relu: return x > 0.0 ? 1.0 : 0.0;
    case Kind::erf:
      return 2.0 * scale_ * std::numbers::inv_sqrtpi * std::exp(-scale_ * scale_ * x * x);
    case Kind::tanh: {
      double t = std::tanh(x);
      return 1.0 - t * t;
    }
    case Kind::identity: return 1.0;
    case Kind::hermite: return order_ == 0 ? 0.0 : order_ * he_poly(order_ - 1, x);
    case Kind::polynomial: return horner(differentiate(coeffs_), x);
    case Kind::sum: {
      double s = 0.0;
      for (const auto& p : parts_) s += p.derivative(x);
      return s;
    }
  }
  return 0.0;
}

Eigen::ArrayXXd Activation::apply(const Eigen::ArrayXXd& x) const {
  switch (kind_) {
    case Kind::relu: return x.max(0.0);
    case Kind::erf: return (scale_ * x).unaryExpr([](double v) { return std::erf(v); });
    case Kind::tanh: return x.tanh();
    case Kind::identity: return x;
    case Kind::hermite: return horner(he_monomial_coefficients(order_), x);
    case Kind::polynomial: return horner(coeffs_, x);
    case Kind::sum: {
      Eigen::ArrayXXd s = parts_.front().apply(x);
      for (std::size_t i = 1; i < parts_.size(); ++i) s += parts_[i].apply(x);
      return s;
    }
  }
  return x;
}

Eigen::ArrayXXd Activation::apply_derivative(const Eigen::ArrayXXd& x) const {
  switch (kind_) {
    case Kind::relu: return (x > 0.0).cast<double>();
    case Kind::erf:
      return 2.0 * scale_ * std::numbers::inv_sqrtpi * (-(scale_ * scale_) * x.square()).exp();
    case Kind::tanh: return 1.0 - x.tanh().square();
    case Kind::identity: return Eigen::ArrayXXd::Ones(x.rows(), x.cols());
    case Kind::hermite:
      return horner(differentiate(he_monomial_coefficients(order_)), x);
    case Kind::polynomial: return horner(differentiate(coeffs_), x);
    case Kind::sum: {
      Eigen::ArrayXXd s = parts_.front().apply_derivative(x);
      for (std::size_t i = 1; i < parts_.size(); ++i) s += parts_[i].apply_derivative(x);
      return s;
    }
  }
  return x;
}

bool Activation::is_polynomial() const {
  switch (kind_) {
    case Kind::identity:
    case Kind::hermite:
    case Kind::polynomial: return true;
    case Kind::sum:
      return std::all_of(parts_.begin(), parts_.end(),
                         [](const Activation& p) { return p.is_polynomial(); });
    default: return false;
  }
}

std::vector<double> Activation::monomial_coefficients() const {
  switch (kind_) {
    case Kind::identity: return {0.0, 1.0};
    case Kind::hermite: return he_monomial_coefficients(order_);
    case Kind::polynomial: return coeffs_;
    case Kind::sum: {
      std::vector<double> out;
      for (const auto& p : parts_) {
        auto c = p.monomial_coefficients();
        if (c.size() > out.size()) out.resize(c.size(), 0.0);
        for (std::size_t m = 0; m < c.size(); ++m) out[m] += c[m];
      }
      return out;
    }
    default:
      throw std::logic_error("monomial_coefficients: " + name() + " is not polynomial");
  }
}

std::string Activation::name() const {
  switch (kind_) {
    case Kind::relu: return "relu";
    case Kind::erf:
      if (scale_ == 1.0) return "erf";
      return "erf(" + std::to_string(scale_) + "x)";
    case Kind::tanh: return "tanh";
    case Kind::identity: return "identity";
    case Kind::hermite: return "he" + std::to_string(order_);
    case Kind::polynomial: {
      std::ostringstream os;
      os.precision(17);
      os << "poly(";
      for (std::size_t m = 0; m < coeffs_.size(); ++m) os << (m ? "," : "") << coeffs_[m];
      os << ")";
      return os.str();
    }
    case Kind::sum: {
      std::string s;
      for (std::size_t i = 0; i < parts_.size(); ++i) s += (i ? "+" : "") + parts_[i].name();
      return s;
    }
  }
  return "?";
}

}  // namespace giantstep
