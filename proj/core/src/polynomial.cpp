#include "giantstep/polynomial.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace giantstep {

double gaussian_moment(int k) {
  if (k < 0) throw std::invalid_argument("negative moment order");
  if (k % 2 == 1) return 0.0;
  double m = 1.0;
  for (int j = k - 1; j > 1; j -= 2) m *= j;
  return m;
}

Polynomial Polynomial::constant(int num_vars, double c) {
  Polynomial p(num_vars);
  p.add_term(Exponent(num_vars, 0), c);
  return p;
}

Polynomial Polynomial::variable(int num_vars, int index, double coeff) {
  if (index < 0 || index >= num_vars)
    throw std::out_of_range("variable index out of range");
  Polynomial p(num_vars);
  Exponent e(num_vars, 0);
  e[index] = 1;
  p.add_term(e, coeff);
  return p;
}

Polynomial Polynomial::hermite(int num_vars, int index, int k) {
  if (k < 0) throw std::invalid_argument("negative Hermite order");
  Polynomial prev = constant(num_vars, 1.0);
  if (k == 0) return prev;
  const Polynomial x = variable(num_vars, index);
  Polynomial cur = x;
  for (int j = 1; j < k; ++j) {
    Polynomial next = x * cur - prev * static_cast<double>(j);
    prev = std::move(cur);
    cur = std::move(next);
  }
  return cur;
}

int Polynomial::degree() const {
  int deg = -1;
  for (const auto& [e, c] : terms_) {
    int s = 0;
    for (int v : e) s += v;
    deg = std::max(deg, s);
  }
  return deg;
}

double Polynomial::coefficient(const Exponent& e) const {
  auto it = terms_.find(e);
  return it == terms_.end() ? 0.0 : it->second;
}

void Polynomial::add_term(const Exponent& e, double c) {
  if (static_cast<int>(e.size()) != num_vars_)
    throw std::invalid_argument("exponent length does not match num_vars");
  if (c == 0.0) return;
  auto [it, inserted] = terms_.emplace(e, c);
  if (!inserted) {
    it->second += c;
    if (it->second == 0.0) terms_.erase(it);
  }
}

double Polynomial::evaluate(const double* x) const {
  double total = 0.0;
  for (const auto& [e, c] : terms_) {
    double t = c;
    for (int i = 0; i < num_vars_; ++i)
      for (int k = 0; k < e[i]; ++k) t *= x[i];
    total += t;
  }
  return total;
}

Eigen::VectorXd Polynomial::evaluate_rows(const Eigen::MatrixXd& X) const {
  if (X.cols() != num_vars_)
    throw std::invalid_argument("evaluate_rows: column count != num_vars");
  Eigen::VectorXd out = Eigen::VectorXd::Zero(X.rows());
  for (const auto& [e, c] : terms_) {
    Eigen::ArrayXd t = Eigen::ArrayXd::Constant(X.rows(), c);
    for (int i = 0; i < num_vars_; ++i)
      for (int k = 0; k < e[i]; ++k) t *= X.col(i).array();
    out.array() += t;
  }
  return out;
}

Polynomial Polynomial::derivative(int var) const {
  Polynomial out(num_vars_);
  for (const auto& [e, c] : terms_) {
    if (e[var] == 0) continue;
    Exponent f = e;
    f[var] -= 1;
    out.add_term(f, c * e[var]);
  }
  return out;
}

Polynomial Polynomial::substitute_linear(const Eigen::MatrixXd& Q) const {
  if (Q.rows() != num_vars_)
    throw std::invalid_argument("substitute_linear: Q must have num_vars rows");
  const int m = static_cast<int>(Q.cols());
  std::vector<Polynomial> forms;
  forms.reserve(num_vars_);
  for (int i = 0; i < num_vars_; ++i) {
    Polynomial f(m);
    for (int j = 0; j < m; ++j) {
      Exponent e(m, 0);
      e[j] = 1;
      f.add_term(e, Q(i, j));
    }
    forms.push_back(std::move(f));
  }
  // Powers of each linear form are reused across monomials.
  std::vector<std::vector<Polynomial>> powers(num_vars_);
  Polynomial out(m);
  for (const auto& [e, c] : terms_) {
    Polynomial t = constant(m, c);
    for (int i = 0; i < num_vars_; ++i) {
      if (e[i] == 0) continue;
      auto& pw = powers[i];
      if (pw.empty()) pw.push_back(constant(m, 1.0));
      while (static_cast<int>(pw.size()) <= e[i]) pw.push_back(pw.back() * forms[i]);
      t = t * pw[e[i]];
    }
    out += t;
  }
  return out;
}

Polynomial Polynomial::expectation_over(const std::vector<bool>& integrate) const {
  if (static_cast<int>(integrate.size()) != num_vars_)
    throw std::invalid_argument("expectation_over: mask length != num_vars");
  const int kept = static_cast<int>(std::count(integrate.begin(), integrate.end(), false));
  Polynomial out(kept);
  for (const auto& [e, c] : terms_) {
    double w = c;
    Exponent f;
    f.reserve(kept);
    for (int i = 0; i < num_vars_ && w != 0.0; ++i) {
      if (integrate[i]) w *= gaussian_moment(e[i]);
      else f.push_back(e[i]);
    }
    if (w != 0.0) out.add_term(f, w);
  }
  return out;
}

double Polynomial::expectation() const {
  return expectation_over(std::vector<bool>(num_vars_, true)).coefficient({});
}

Polynomial Polynomial::with_num_vars(int num_vars) const {
  Polynomial out(num_vars);
  for (const auto& [e, c] : terms_) {
    Exponent f(num_vars, 0);
    for (int i = 0; i < num_vars_; ++i) {
      if (i < num_vars) f[i] = e[i];
      else if (e[i] != 0)
        throw std::invalid_argument("with_num_vars would drop a used variable");
    }
    out.add_term(f, c);
  }
  return out;
}

double Polynomial::max_abs_coefficient() const {
  double m = 0.0;
  for (const auto& [e, c] : terms_) m = std::max(m, std::abs(c));
  return m;
}

Polynomial Polynomial::pruned(double rel_tol) const {
  const double cut = rel_tol * max_abs_coefficient();
  Polynomial out(num_vars_);
  for (const auto& [e, c] : terms_)
    if (std::abs(c) > cut) out.terms_.emplace(e, c);
  return out;
}

Polynomial& Polynomial::operator+=(const Polynomial& o) {
  if (o.num_vars_ != num_vars_) throw std::invalid_argument("num_vars mismatch");
  if (&o == this) return *this *= 2.0;
  for (const auto& [e, c] : o.terms_) add_term(e, c);
  return *this;
}

Polynomial& Polynomial::operator-=(const Polynomial& o) {
  if (o.num_vars_ != num_vars_) throw std::invalid_argument("num_vars mismatch");
  if (&o == this) return *this *= 0.0;
  for (const auto& [e, c] : o.terms_) add_term(e, -c);
  return *this;
}

Polynomial& Polynomial::operator*=(double s) {
  if (s == 0.0) {
    terms_.clear();
    return *this;
  }
  for (auto& [e, c] : terms_) c *= s;
  return *this;
}

Polynomial Polynomial::operator*(const Polynomial& o) const {
  if (o.num_vars_ != num_vars_) throw std::invalid_argument("num_vars mismatch");
  Polynomial out(num_vars_);
  Exponent f(num_vars_);
  for (const auto& [e1, c1] : terms_)
    for (const auto& [e2, c2] : o.terms_) {
      for (int i = 0; i < num_vars_; ++i) f[i] = e1[i] + e2[i];
      out.add_term(f, c1 * c2);
    }
  return out;
}

Polynomial Polynomial::pow(int k) const {
  if (k < 0) throw std::invalid_argument("negative power");
  Polynomial out = constant(num_vars_, 1.0);
  for (int i = 0; i < k; ++i) out = out * *this;
  return out;
}

std::string Polynomial::to_string() const {
  if (terms_.empty()) return "0";
  std::ostringstream os;
  os.precision(12);
  bool first = true;
  // Highest degree first reads more naturally.
  std::vector<std::pair<Exponent, double>> items(terms_.rbegin(), terms_.rend());
  for (const auto& [e, c] : items) {
    double mag = std::abs(c);
    if (first) {
      if (c < 0) os << "-";
    } else {
      os << (c < 0 ? " - " : " + ");
    }
    first = false;
    bool has_var = false;
    std::ostringstream mono;
    for (int i = 0; i < num_vars_; ++i) {
      if (e[i] == 0) continue;
      if (has_var) mono << "*";
      mono << "z" << (i + 1);
      if (e[i] > 1) mono << "^" << e[i];
      has_var = true;
    }
    if (!has_var) os << mag;
    else if (mag == 1.0) os << mono.str();
    else os << mag << "*" << mono.str();
  }
  return os.str();
}

// ---------------------------------------------------------------------------
// Expression parser.

namespace {

class Parser {
 public:
  Parser(std::string_view text, int num_vars) : s_(text), n_(num_vars) {}

  Polynomial parse() {
    Polynomial p = expr();
    skip_ws();
    if (pos_ != s_.size()) fail("unexpected character");
    return p;
  }

 private:
  [[noreturn]] void fail(const std::string& what) const {
    throw std::invalid_argument("polynomial parse error at column " +
                                std::to_string(pos_ + 1) + ": " + what +
                                " in \"" + std::string(s_) + "\"");
  }

  void skip_ws() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }

  bool accept(char c) {
    skip_ws();
    if (pos_ < s_.size() && s_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  int integer() {
    skip_ws();
    std::size_t start = pos_;
    while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) ++pos_;
    if (start == pos_) fail("expected integer");
    return std::stoi(std::string(s_.substr(start, pos_ - start)));
  }

  Polynomial expr() {
    Polynomial p = term();
    while (true) {
      if (accept('+')) p += term();
      else if (accept('-')) p -= term();
      else return p;
    }
  }

  Polynomial term() {
    Polynomial p = unary();
    while (true) {
      if (accept('*')) {
        p = p * unary();
      } else if (accept('/')) {
        Polynomial q = unary();
        if (q.degree() > 0 || q.is_zero()) fail("division only by nonzero constants");
        p *= 1.0 / q.coefficient(Exponent(n_, 0));
      } else {
        return p;
      }
    }
  }

  Polynomial unary() {
    if (accept('-')) return unary() * -1.0;
    if (accept('+')) return unary();
    return power();
  }

  Polynomial power() {
    Polynomial base = primary();
    if (accept('^')) return base.pow(integer());
    return base;
  }

  Polynomial primary() {
    skip_ws();
    if (pos_ >= s_.size()) fail("unexpected end of expression");
    char c = s_[pos_];
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
      std::size_t used = 0;
      double v = std::stod(std::string(s_.substr(pos_)), &used);
      pos_ += used;
      return Polynomial::constant(n_, v);
    }
    if (c == 'z') {
      ++pos_;
      int idx = integer();
      if (idx < 1 || idx > n_) fail("variable index out of range");
      return Polynomial::variable(n_, idx - 1);
    }
    if (s_.substr(pos_, 2) == "He") {
      pos_ += 2;
      int k = integer();
      if (!accept('(')) fail("expected '(' after He" + std::to_string(k));
      Polynomial arg = expr();
      if (!accept(')')) fail("expected ')'");
      // He_{k+1}(q) = q He_k(q) - k He_{k-1}(q) holds for any argument q.
      Polynomial prev = Polynomial::constant(n_, 1.0);
      if (k == 0) return prev;
      Polynomial cur = arg;
      for (int j = 1; j < k; ++j) {
        Polynomial next = arg * cur - prev * static_cast<double>(j);
        prev = std::move(cur);
        cur = std::move(next);
      }
      return cur;
    }
    if (accept('(')) {
      Polynomial p = expr();
      if (!accept(')')) fail("expected ')'");
      return p;
    }
    fail(std::string("unexpected character '") + c + "'");
  }

  std::string_view s_;
  int n_;
  std::size_t pos_ = 0;
};

int max_variable_index(std::string_view s) {
  int best = 0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] != 'z') continue;
    std::size_t j = i + 1;
    int v = 0;
    bool any = false;
    while (j < s.size() && std::isdigit(static_cast<unsigned char>(s[j]))) {
      v = v * 10 + (s[j] - '0');
      ++j;
      any = true;
    }
    if (any) best = std::max(best, v);
  }
  return best;
}

}  // namespace

Polynomial Polynomial::parse(std::string_view text, int num_vars) {
  int n = num_vars > 0 ? num_vars : std::max(1, max_variable_index(text));
  return Parser(text, n).parse();
}

}  // namespace giantstep
