#include "giantstep/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "giantstep/hermite.hpp"
#include "giantstep/hermite_tensor.hpp"

namespace giantstep {

Eigen::VectorXd AlignmentReport::ratios() const {
  Eigen::VectorXd r(neurons.size());
  for (std::size_t i = 0; i < neurons.size(); ++i) r(i) = neurons[i].ratio;
  return r;
}

AlignmentReport alignment_report(const Eigen::MatrixXd& W, const Eigen::MatrixXd& teacher) {
  if (W.cols() != teacher.cols()) throw std::invalid_argument("alignment_report: dimension mismatch");
  AlignmentReport rep;
  const Eigen::MatrixXd overlaps = W * teacher.transpose();
  for (Eigen::Index i = 0; i < W.rows(); ++i) {
    NeuronAlignment n;
    n.overlap = overlaps.row(i).transpose();
    n.norm = W.row(i).norm();
    if (n.norm > 0.0) {
      n.cosine = n.overlap / n.norm;
      n.ratio = std::clamp(n.overlap.squaredNorm() / (n.norm * n.norm), 0.0, 1.0);
    }
    rep.neurons.push_back(std::move(n));
  }
  return rep;
}

AlignmentReport alignment_report(const Eigen::MatrixXd& W, const MultiIndexTarget& target) {
  return alignment_report(W, target.teacher());
}

SpikeBulk spike_bulk(const Eigen::MatrixXd& g, const Eigen::VectorXd& a, const Dataset& batch,
                     double mu1) {
  if (g.rows() != a.size() || g.cols() != batch.inputs.cols())
    throw std::invalid_argument("spike_bulk: shape mismatch");
  SpikeBulk sb;
  sb.u = (mu1 / std::sqrt(static_cast<double>(a.size()))) * a;
  sb.v = batch.inputs.transpose() * batch.labels / static_cast<double>(batch.inputs.rows());
  sb.delta = g - sb.u * sb.v.transpose();
  return sb;
}

NormConstant norm_constant_oracle(const Activation& student, const MultiIndexTarget& target, int n,
                                  int d, int mc_samples, std::uint64_t seed) {
  const int r = target.r();
  if (d < r + 1) throw std::invalid_argument("norm_constant_oracle needs d > r");
  // Column 0 is x = <w, z>, columns 1..r are W* z (independent at zero overlap).
  const Eigen::MatrixXd s = gaussian_rows(mc_samples, r + 1, seed, Stream::monte_carlo);
  const Eigen::ArrayXd x = s.col(0).array();
  const Eigen::MatrixXd zv = s.rightCols(r);
  const Eigen::ArrayXd f = target.link_rows(zv).array();
  const Eigen::ArrayXd sp = student.apply_derivative(x.matrix()).col(0);
  const Eigen::ArrayXd spf = sp * f;
  Eigen::VectorXd m(r + 1);
  m(0) = (x * spf).mean();
  for (int k = 0; k < r; ++k) m(k + 1) = (zv.col(k).array() * spf).mean();
  // The remaining d - 1 - r coordinates are independent of (x, W* z).
  const Eigen::ArrayXd znorm2 = x.square() + zv.rowwise().squaredNorm().array() + (d - 1 - r);
  const double second = (znorm2 * spf.square()).mean();
  NormConstant out;
  out.n = n;
  out.d = d;
  out.m_w = m(0);
  out.K = (static_cast<double>(n - 1) / n) * m.squaredNorm() + second / n;
  return out;
}

NormConcentrationReport norm_concentration_check(const GDTrace& trace, const TrainConfig& config,
                                                 const Eigen::VectorXd& a0,
                                                 const NormConstant& oracle) {
  if (trace.snapshots.size() < 2) throw std::invalid_argument("trace needs at least one step");
  const Eigen::MatrixXd& W1 = trace.snapshots[1];
  const int p = static_cast<int>(W1.rows());
  if (a0.size() != p) throw std::invalid_argument("second layer size mismatch");
  const double eta = config.eta.value(p, config.d, config.n);
  const double sp = std::sqrt(static_cast<double>(p));
  NormConcentrationReport rep;
  rep.C = eta * oracle.K / (static_cast<double>(p) * p);
  rep.measured = W1.rowwise().squaredNorm();
  rep.predicted.resize(p);
  for (int i = 0; i < p; ++i) {
    const double at = sp * a0(i);
    rep.predicted(i) = 1.0 + eta * rep.C * at * at + 2.0 * eta * (a0(i) / sp) * oracle.m_w;
  }
  rep.relative_deviation =
      ((rep.measured - rep.predicted).array().abs() / rep.predicted.array()).matrix();
  rep.median_relative_deviation = median(std::vector<double>(
      rep.relative_deviation.data(), rep.relative_deviation.data() + p));
  return rep;
}

namespace {

double mean_derivative_square(const Activation& s) {
  if (s.kind() == Activation::Kind::relu) return 0.5;
  return gaussian_expectation([&](double x) { double v = s.derivative(x); return v * v; });
}

Eigen::VectorXd first_hermite_vector(const Polynomial& g) {
  const HermiteTensor C1 = hermite_tensor(g, 1);
  return Eigen::Map<const Eigen::VectorXd>(C1.entries().data(), g.num_vars());
}

}  // namespace

double second_step_shift_ratio(const Activation& student, double eta_over_p, double n_over_d,
                               const MultiIndexTarget& target) {
  const Polynomial g = target.polynomial_approximation();
  const double mu1 = hermite_coeffs(student, 1)[1];
  const double c1 = first_hermite_vector(g).norm();
  const double ef2 = (g * g).expectation();
  const double along = eta_over_p * std::abs(mu1) * c1;
  const double perp2 = 1.0 + eta_over_p * eta_over_p * mean_derivative_square(student) * ef2 / n_over_d;
  return along / std::sqrt(perp2);
}

Eigen::VectorXd predicted_second_step_orientation(const Activation& student, int a_sign,
                                                  double shift_ratio,
                                                  const MultiIndexTarget& target) {
  if (student.kind() != Activation::Kind::relu)
    throw std::domain_error("no closed form for the second-step orientation with student " +
                            student.name() + " (only relu); use the staircase oracle instead");
  if (!target.has_polynomial_link())
    throw std::domain_error("no closed form for the second-step orientation with a non-polynomial link");
  if (a_sign != 1 && a_sign != -1) throw std::invalid_argument("a_sign must be +1 or -1");
  const Polynomial& g = target.polynomial_link();
  const int r = g.num_vars();
  const Eigen::VectorXd c1 = first_hermite_vector(g);
  if (c1.norm() <= 1e-12)
    throw std::domain_error("no closed form: the target has no first-order spike (leap index > 1)");

  Subspace spike = Subspace::span(c1);
  Eigen::MatrixXd Q(r, r);
  Q << spike.basis(), spike.complement();
  const Polynomial h = g.substitute_linear(Q);

  // E[x^m Phi(b x)] = E[x^m]/2 + E[x^m erf(b x / sqrt2)]/2, the erf term
  // through its Hermite coefficients (only k <= m contribute).
  const double b = a_sign * shift_ratio;
  const int max_m = h.degree() + 1;
  const HermiteSeries erf_series = hermite_coeffs(Activation::erf(b / std::numbers::sqrt2), max_m);
  std::vector<double> phi_moment(max_m + 1);
  for (int m = 0; m <= max_m; ++m) {
    double e = 0.0;
    for (int k = 0; k <= m; ++k) e += erf_series[k] / factorial(k) * monomial_hermite_moment(m, k);
    phi_moment[m] = 0.5 * gaussian_moment(m) + 0.5 * e;
  }

  std::vector<bool> integrate(r, true);
  integrate[0] = false;
  Eigen::VectorXd A(r);
  for (int j = 0; j < r; ++j) {
    const Polynomial F = (h * Polynomial::variable(r, j)).expectation_over(integrate);
    double a = 0.0;
    for (const auto& [e, c] : F.terms()) a += c * phi_moment[e[0]];
    A(j) = a;
  }
  Eigen::VectorXd dir = Q * A;
  const double nrm = dir.norm();
  if (nrm == 0.0) throw std::domain_error("predicted orientation vanishes");
  return dir / nrm;
}

Eigen::VectorXd predicted_second_step_orientation(const Activation& student, int a_sign,
                                                  double eta_over_p, double n_over_d,
                                                  const MultiIndexTarget& target) {
  return predicted_second_step_orientation(
      student, a_sign, second_step_shift_ratio(student, eta_over_p, n_over_d, target), target);
}

double ThresholdRule::tau(int d) const { return c * std::log(static_cast<double>(d)) / std::sqrt(d); }

Subspace recover_learned_subspace(const Eigen::MatrixXd& W, const MultiIndexTarget& target,
                                  const ThresholdRule& rule) {
  const double tau = rule.tau(target.d());
  const auto rep = alignment_report(W, target);
  std::vector<Eigen::VectorXd> rows;
  for (const auto& n : rep.neurons)
    if (n.norm > 0.0 && n.overlap.norm() / n.norm > tau) rows.push_back(n.overlap / n.norm);
  Subspace out(target.r());
  if (rows.empty()) return out;
  Eigen::MatrixXd M(rows.size(), target.r());
  for (std::size_t i = 0; i < rows.size(); ++i) M.row(i) = rows[i].transpose();
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(M, Eigen::ComputeFullV);
  std::vector<Eigen::VectorXd> keep;
  for (Eigen::Index k = 0; k < svd.singularValues().size(); ++k)
    if (svd.singularValues()(k) > tau) keep.push_back(svd.matrixV().col(k));
  out.extend(keep);
  return out;
}

ErrorEstimate generalization_error(const Predictor& predictor, const MultiIndexTarget& target,
                                   int n_test, std::uint64_t seed, bool normalize) {
  if (n_test < 2) throw std::invalid_argument("n_test must be >= 2");
  const Eigen::MatrixXd Z = gaussian_rows(n_test, target.d(), seed, Stream::test);
  const Eigen::ArrayXd sq = (predictor(Z) - target.evaluate(Z)).array().square();
  ErrorEstimate e;
  e.mse = sq.mean();
  e.std_error = std::sqrt((sq - e.mse).square().sum() / (n_test - 1) / n_test);
  if (normalize) {
    const double v = target.variance();
    e.mse /= v;
    e.std_error /= v;
  }
  return e;
}

double median(std::vector<double> values) {
  if (values.empty()) throw std::invalid_argument("median of empty list");
  const std::size_t mid = values.size() / 2;
  std::nth_element(values.begin(), values.begin() + mid, values.end());
  double m = values[mid];
  if (values.size() % 2 == 0) {
    const double lo = *std::max_element(values.begin(), values.begin() + mid);
    m = 0.5 * (m + lo);
  }
  return m;
}

double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) throw std::invalid_argument("loglog_slope needs >= 2 points");
  double mx = 0, my = 0;
  const double n = static_cast<double>(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += std::log(x[i]) / n;
    my += std::log(y[i]) / n;
  }
  double sxy = 0, sxx = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = std::log(x[i]) - mx;
    sxy += dx * (std::log(y[i]) - my);
    sxx += dx * dx;
  }
  return sxy / sxx;
}

}  // namespace giantstep
