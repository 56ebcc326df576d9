#include "giantstep/target.hpp"

#include <cmath>
#include <stdexcept>

#include "giantstep/errors.hpp"
#include "giantstep/hermite.hpp"

namespace giantstep {

namespace {

void check_teacher(const Eigen::MatrixXd& teacher) {
  if (teacher.rows() < 1) throw DimensionError("teacher needs at least one direction");
  if (teacher.cols() < teacher.rows())
    throw DimensionError("input dimension d=" + std::to_string(teacher.cols()) +
                         " is smaller than r=" + std::to_string(teacher.rows()));
  const Eigen::MatrixXd gram = teacher * teacher.transpose();
  if ((gram - Eigen::MatrixXd::Identity(gram.rows(), gram.cols())).cwiseAbs().maxCoeff() > 1e-10)
    throw std::invalid_argument("teacher rows are not orthonormal");
}

}  // namespace

MultiIndexTarget::MultiIndexTarget(Eigen::MatrixXd teacher, Polynomial link)
    : teacher_(std::move(teacher)), poly_(std::move(link)) {
  check_teacher(teacher_);
  if (poly_->num_vars() != r())
    throw DimensionError("link has " + std::to_string(poly_->num_vars()) +
                         " variables but teacher has " + std::to_string(r()) + " rows");
}

MultiIndexTarget::MultiIndexTarget(Eigen::MatrixXd teacher, std::vector<Activation> components)
    : teacher_(std::move(teacher)), components_(std::move(components)) {
  check_teacher(teacher_);
  if (static_cast<int>(components_.size()) != r())
    throw DimensionError("need one link component per teacher direction");
}

Eigen::MatrixXd MultiIndexTarget::aligned_teacher(int r, int d) {
  if (d < r) throw DimensionError("d < r");
  return Eigen::MatrixXd::Identity(r, d);
}

Eigen::MatrixXd MultiIndexTarget::random_teacher(int r, int d, std::uint64_t seed) {
  if (d < r) throw DimensionError("d < r");
  Eigen::MatrixXd g(d, r);
  Rng rng(seed, Stream::teacher);
  rng.fill_normal(g);
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(g);
  Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(d, r);
  // Fix signs so the factorization is unique.
  for (int j = 0; j < r; ++j)
    if (qr.matrixQR()(j, j) < 0) q.col(j) *= -1.0;
  return q.transpose();
}

const Polynomial& MultiIndexTarget::polynomial_link() const {
  if (!poly_) throw std::logic_error("target link is not polynomial");
  return *poly_;
}

Polynomial MultiIndexTarget::polynomial_approximation(int degree) const {
  if (poly_) return *poly_;
  Polynomial out(r());
  for (int k = 0; k < r(); ++k) {
    const auto series = hermite_coeffs(components_[k], degree);
    const auto c = truncated_hermite_activation(series).monomial_coefficients();
    for (std::size_t m = 0; m < c.size(); ++m) {
      Exponent e(r(), 0);
      e[k] = static_cast<int>(m);
      out.add_term(e, c[m]);
    }
  }
  return out;
}

MultiIndexTarget MultiIndexTarget::with_teacher(Eigen::MatrixXd teacher) const {
  if (poly_) return MultiIndexTarget(std::move(teacher), *poly_);
  return MultiIndexTarget(std::move(teacher), components_);
}

Eigen::VectorXd MultiIndexTarget::link_rows(const Eigen::MatrixXd& x) const {
  if (x.cols() != r()) throw DimensionError("link_rows: expected r columns");
  if (poly_) return poly_->evaluate_rows(x);
  Eigen::VectorXd out = Eigen::VectorXd::Zero(x.rows());
  for (int k = 0; k < r(); ++k) out += components_[k].apply(x.col(k).array()).matrix();
  return out;
}

Eigen::VectorXd MultiIndexTarget::evaluate(const Eigen::MatrixXd& inputs) const {
  if (inputs.cols() != d()) throw DimensionError("evaluate: expected d columns");
  return link_rows(inputs * teacher_.transpose());
}

double MultiIndexTarget::mean() const {
  if (poly_) return poly_->expectation();
  double m = 0.0;
  for (const auto& c : components_) m += hermite_coeffs(c, 0)[0];
  return m;
}

double MultiIndexTarget::variance() const {
  if (poly_) {
    const double m = poly_->expectation();
    return (*poly_ * *poly_).expectation() - m * m;
  }
  // Independent coordinates: variances add.
  double v = 0.0;
  for (const auto& c : components_) {
    const double m = hermite_coeffs(c, 0)[0];
    v += gaussian_expectation([&](double x) { double y = c.value(x); return y * y; }) - m * m;
  }
  return v;
}

Dataset sample_dataset(const MultiIndexTarget& target, int n, int d, std::uint64_t seed) {
  if (d < target.r()) throw DimensionError("sample_dataset: d < r");
  if (d != target.d())
    throw DimensionError("sample_dataset: d=" + std::to_string(d) +
                         " differs from the target's dimension " + std::to_string(target.d()));
  if (n < 1) throw std::invalid_argument("sample_dataset: n must be >= 1");
  Dataset ds;
  ds.inputs = gaussian_rows(n, d, seed, Stream::batch);
  ds.labels = target.evaluate(ds.inputs);
  return ds;
}

McEstimate conditional_variance(const MultiIndexTarget& target, const Subspace& U,
                                int mc_samples, std::uint64_t seed) {
  if (U.ambient() != target.r()) throw DimensionError("subspace must live in R^r");
  if (mc_samples < 2) throw std::invalid_argument("need at least two Monte Carlo samples");
  const int r = target.r();
  const Eigen::MatrixXd B = U.basis();
  const Eigen::MatrixXd C = U.complement();
  const Eigen::MatrixXd b = gaussian_rows(mc_samples, B.cols(), seed, Stream::monte_carlo, 0);
  const Eigen::MatrixXd c1 = gaussian_rows(mc_samples, C.cols(), seed, Stream::monte_carlo, 1);
  const Eigen::MatrixXd c2 = gaussian_rows(mc_samples, C.cols(), seed, Stream::monte_carlo, 2);
  Eigen::MatrixXd base = Eigen::MatrixXd::Zero(mc_samples, r);
  if (B.cols() > 0) base = b * B.transpose();
  Eigen::MatrixXd x1 = base, x2 = base;
  if (C.cols() > 0) {
    x1 += c1 * C.transpose();
    x2 += c2 * C.transpose();
  }
  const Eigen::ArrayXd half_sq =
      0.5 * (target.link_rows(x1) - target.link_rows(x2)).array().square();
  McEstimate est;
  est.value = half_sq.mean();
  const double var = (half_sq - est.value).square().sum() / (mc_samples - 1);
  est.std_error = std::sqrt(var / mc_samples);
  return est;
}

}  // namespace giantstep
