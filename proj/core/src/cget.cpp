#include "giantstep/cget.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <stdexcept>

#include "giantstep/errors.hpp"
#include "giantstep/hermite_tensor.hpp"
#include "giantstep/ridge.hpp"
#include "giantstep/staircase.hpp"

namespace giantstep {

namespace {

Eigen::VectorXd first_hermite(const MultiIndexTarget& target) {
  const Polynomial g = target.polynomial_approximation();
  const HermiteTensor C1 = hermite_tensor(g, 1);
  return Eigen::Map<const Eigen::VectorXd>(C1.entries().data(), g.num_vars());
}

}  // namespace

SpikeDirection compute_spike(const Dataset& data, const MultiIndexTarget& target) {
  SpikeDirection s;
  s.v = data.inputs.transpose() * data.labels / static_cast<double>(data.inputs.rows());
  s.v_teacher = target.teacher() * s.v;
  const Eigen::VectorXd c1 = first_hermite(target);
  const double denom = s.v_teacher.norm() * c1.norm();
  s.c1_cosine = denom > 0.0 ? s.v_teacher.dot(c1) / denom : 0.0;
  return s;
}

std::vector<double> uniform_grid(int knots, double half_width) {
  if (knots < 2) throw std::invalid_argument("grid needs at least two knots");
  std::vector<double> g(knots);
  for (int k = 0; k < knots; ++k) g[k] = -half_width + 2.0 * half_width * k / (knots - 1);
  return g;
}

ConditionalMoments conditional_moments(const TwoLayerNet& net, const Eigen::VectorXd& v,
                                       const std::vector<double>& grid, int mc_samples,
                                       std::uint64_t seed) {
  const int p = net.width();
  const int d = net.input_dim();
  if (v.size() != d) throw std::invalid_argument("spike vector has wrong dimension");
  const double vn = v.norm();
  if (vn == 0.0) throw std::domain_error("conditional moments need a nonzero spike direction");
  if (grid.size() < 2) throw std::invalid_argument("grid needs at least two knots");
  if (mc_samples < 2) throw std::invalid_argument("mc_samples must be >= 2");
  if (mc_samples < p)
    std::clog << "warning: mc_samples (" << mc_samples << ") < p (" << p
              << "), conditional covariance is ill-conditioned; shrinkage applied\n";

  ConditionalMoments out;
  out.grid = grid;
  out.v_hat = v / vn;
  out.shrinkage_applied = mc_samples < 10 * p;
  // Orthonormal basis of the complement of v_hat; z_perp = Y Q^T with Y
  // standard Gaussian in d - 1 coordinates.
  Eigen::MatrixXd full = Eigen::MatrixXd::Identity(d, d);
  full.col(0) = out.v_hat;
  const Eigen::MatrixXd H = Eigen::HouseholderQR<Eigen::MatrixXd>(full).householderQ();
  const Eigen::MatrixXd Q = H.rightCols(d - 1);
  const double m = static_cast<double>(mc_samples);
  double clipped = 0.0, total = 0.0;
  for (std::size_t k = 0; k < grid.size(); ++k) {
    Eigen::MatrixXd Y = gaussian_rows(mc_samples, d - 1, seed, Stream::monte_carlo, k);
    Eigen::MatrixXd Z = Y * Q.transpose();
    Z.rowwise() += grid[k] * out.v_hat.transpose();
    Eigen::MatrixXd X = features(net, Z);
    // Least-squares fit X ~ mu + Y Psi_Q^T. The intercept and slope are
    // consistent estimators of E[phi | z_v] and E[phi z_perp^T | z_v], and
    // the residual covariance is PSD by construction.
    const Eigen::RowVectorXd ybar = Y.colwise().mean();
    const Eigen::RowVectorXd xbar = X.colwise().mean();
    Y.rowwise() -= ybar;
    X.rowwise() -= xbar;
    Eigen::MatrixXd gram = Y.transpose() * Y;
    if (mc_samples <= d) gram.diagonal().array() += 1e-8 * gram.trace() / (d - 1);
    const Eigen::LLT<Eigen::MatrixXd> llt(gram);
    if (llt.info() != Eigen::Success) throw NumericalError("conditional regression is singular");
    const Eigen::MatrixXd psi_q = llt.solve(Y.transpose() * X).transpose();  // p × (d-1)
    Eigen::VectorXd mu = (xbar - ybar * psi_q.transpose()).transpose();
    X.noalias() -= Y * psi_q.transpose();
    Eigen::MatrixXd phi = X.transpose() * X / m;
    if (out.shrinkage_applied) phi.diagonal().array() += 1e-6 * phi.trace() / p;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(phi);
    if (es.info() != Eigen::Success) throw NumericalError("eigendecomposition of conditional covariance failed");
    Eigen::VectorXd ev = es.eigenvalues();
    for (Eigen::Index i = 0; i < ev.size(); ++i) {
      if (ev(i) < 0.0) {
        clipped += -ev(i);
        ev(i) = 0.0;
      }
      total += ev(i);
    }
    out.phi_sqrt.push_back(es.eigenvectors() * ev.cwiseSqrt().asDiagonal() *
                           es.eigenvectors().transpose());
    out.mu.push_back(std::move(mu));
    out.psi.push_back(psi_q * Q.transpose());
  }
  out.clipped_fraction = total > 0.0 ? clipped / total : 0.0;
  return out;
}

Eigen::MatrixXd sample_cl_features(const Eigen::MatrixXd& Z, const ConditionalMoments& mom,
                                   std::uint64_t seed) {
  const Eigen::Index n = Z.rows();
  const int p = static_cast<int>(mom.mu.front().size());
  const int K = static_cast<int>(mom.grid.size());
  if (Z.cols() != mom.v_hat.size()) throw std::invalid_argument("inputs have wrong dimension");
  const Eigen::VectorXd zv = Z * mom.v_hat;
  const Eigen::MatrixXd zperp = Z - zv * mom.v_hat.transpose();
  const Eigen::MatrixXd xi = gaussian_rows(n, p, seed, Stream::cl_noise);

  std::vector<std::vector<Eigen::Index>> rows(K - 1);
  std::vector<double> weight(n);
  const double lo = mom.grid.front(), hi = mom.grid.back();
  for (Eigen::Index i = 0; i < n; ++i) {
    const double x = std::clamp(zv(i), lo, hi);
    int k = static_cast<int>(std::upper_bound(mom.grid.begin(), mom.grid.end(), x) - mom.grid.begin()) - 1;
    k = std::clamp(k, 0, K - 2);
    weight[i] = (x - mom.grid[k]) / (mom.grid[k + 1] - mom.grid[k]);
    rows[k].push_back(i);
  }

  Eigen::MatrixXd out(n, p);
  for (int k = 0; k < K - 1; ++k) {
    const auto& idx = rows[k];
    if (idx.empty()) continue;
    const Eigen::Index m = static_cast<Eigen::Index>(idx.size());
    Eigen::MatrixXd zp(m, Z.cols()), e(m, p);
    Eigen::ArrayXd w(m);
    for (Eigen::Index j = 0; j < m; ++j) {
      zp.row(j) = zperp.row(idx[j]);
      e.row(j) = xi.row(idx[j]);
      w(j) = weight[idx[j]];
    }
    auto at_knot = [&](int q) {
      Eigen::MatrixXd f = zp * mom.psi[q].transpose();
      f.noalias() += e * mom.phi_sqrt[q];
      f.rowwise() += mom.mu[q].transpose();
      return f;
    };
    const Eigen::MatrixXd blended =
        (at_knot(k).array().colwise() * (1.0 - w) + at_knot(k + 1).array().colwise() * w).matrix();
    for (Eigen::Index j = 0; j < m; ++j) out.row(idx[j]) = blended.row(j);
  }
  return out;
}

std::vector<CgetSeedResult> compare_ck_cl(const MultiIndexTarget& target, const TrainConfig& config,
                                          double lambda, const std::vector<std::uint64_t>& seeds,
                                          const CgetOptions& options) {
  config.validate();
  if (first_hermite(target).norm() <= 1e-10)
    throw std::domain_error(
        "conditional Gaussian equivalence needs a nonzero first Hermite coefficient "
        "(leap index 1); this target has no spike direction");
  const std::vector<double> grid = uniform_grid(options.knots, options.half_width);
  std::vector<CgetSeedResult> out;
  for (std::uint64_t seed : seeds) {
    TrainConfig cfg = config;
    cfg.seed = seed;
    cfg.keep_snapshots = false;
    TwoLayerNet net = init_symmetric(cfg.p, cfg.d, seed, cfg.second_layer_dist, cfg.activation);
    const GDTrace trace = train_first_layer(net, target, cfg);
    const std::uint64_t spike_seed =
        trace.batch_seeds.empty() ? batch_seed(seed, 0) : trace.batch_seeds.front();
    const SpikeDirection spike = compute_spike(sample_dataset(target, cfg.n, cfg.d, spike_seed), target);
    const ConditionalMoments mom =
        conditional_moments(net, spike.v, grid, options.mc_per_width * cfg.p,
                            derive_seed(seed, Stream::monte_carlo));

    const Dataset rb = sample_dataset(target, cfg.n, cfg.d, derive_seed(seed, Stream::ridge_batch, 0));
    const Eigen::VectorXd a_ck = ridge_second_layer(features(net, rb.inputs), rb.labels, lambda);
    const Eigen::VectorXd a_cl = ridge_second_layer(
        sample_cl_features(rb.inputs, mom, derive_seed(seed, Stream::cl_noise, 0)), rb.labels, lambda);

    const Eigen::MatrixXd Zt = gaussian_rows(options.n_test, cfg.d, derive_seed(seed, Stream::test), Stream::test);
    const Eigen::VectorXd yt = target.evaluate(Zt);
    const Eigen::MatrixXd phi_cl = sample_cl_features(Zt, mom, derive_seed(seed, Stream::cl_noise, 1));

    CgetSeedResult r;
    r.seed = seed;
    r.err_ck = (features(net, Zt) * a_ck - yt).squaredNorm() / options.n_test;
    r.err_cl = (phi_cl * a_cl - yt).squaredNorm() / options.n_test;
    r.spike_cosine = spike.c1_cosine;
    const double p4 = std::pow(static_cast<double>(cfg.p), 0.25);
    r.a_ck_norm = a_ck.norm();
    r.a_ck_inf_scaled = a_ck.cwiseAbs().maxCoeff() * p4;
    r.a_cl_norm = a_cl.norm();
    r.a_cl_inf_scaled = a_cl.cwiseAbs().maxCoeff() * p4;
    r.clipped_fraction = mom.clipped_fraction;
    out.push_back(r);
  }
  return out;
}

McEstimate conditionally_nonlinear_mass(const MultiIndexTarget& target, const Subspace& U,
                                        int mc_samples, std::uint64_t seed) {
  const int r = target.r();
  if (U.ambient() != r) throw DimensionError("subspace must live in R^r");
  if (mc_samples < 2) throw std::invalid_argument("mc_samples must be >= 2");
  const Polynomial g = target.polynomial_approximation();
  const Polynomial cmean = conditional_mean(g, U);
  const ParamVectorPolynomial mu = conditional_first_hermite(g, U);
  const Eigen::MatrixXd B = U.basis();
  const Eigen::MatrixXd z = gaussian_rows(mc_samples, r, seed, Stream::monte_carlo);
  const Eigen::VectorXd f = target.link_rows(z);
  Eigen::ArrayXd sq(mc_samples);
  for (int i = 0; i < mc_samples; ++i) {
    const Eigen::VectorXd zi = z.row(i).transpose();
    const Eigen::VectorXd lambda = B.transpose() * zi;
    const Eigen::VectorXd perp = zi - B * lambda;
    const double affine = cmean.evaluate(lambda.data()) + mu.evaluate(lambda).dot(perp);
    sq(i) = (f(i) - affine) * (f(i) - affine);
  }
  McEstimate e;
  e.value = sq.mean();
  e.std_error = std::sqrt((sq - e.value).square().sum() / (mc_samples - 1) / mc_samples);
  return e;
}

double conditionally_nonlinear_mass_exact(const Polynomial& g, const Subspace& U) {
  const int r = g.num_vars();
  if (U.ambient() != r) throw DimensionError("subspace must live in R^r");
  const Eigen::MatrixXd B = U.basis();
  const Eigen::MatrixXd Bt = B.transpose();  // lambda = B^T z
  Polynomial h = g - conditional_mean(g, U).substitute_linear(Bt);
  const ParamVectorPolynomial mu = conditional_first_hermite(g, U);
  const Eigen::MatrixXd P = Eigen::MatrixXd::Identity(r, r) - B * Bt;
  for (int i = 0; i < r; ++i) {
    Polynomial perp(r);
    for (int j = 0; j < r; ++j)
      if (P(i, j) != 0.0) perp += Polynomial::variable(r, j, P(i, j));
    h -= mu.entries[i].substitute_linear(Bt) * perp;
  }
  return (h * h).expectation();
}

LowerBoundCheck lower_bound_check(const MultiIndexTarget& target, const Subspace& U,
                                  double predictor_err, double tol, int mc_samples,
                                  std::uint64_t seed) {
  const McEstimate m = conditionally_nonlinear_mass(target, U, mc_samples, seed);
  LowerBoundCheck c;
  c.bound = m.value;
  c.std_error = m.std_error;
  c.holds = predictor_err >= m.value - tol;
  return c;
}

}  // namespace giantstep
