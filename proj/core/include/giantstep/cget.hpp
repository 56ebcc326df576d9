#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "giantstep/network.hpp"
#include "giantstep/subspace.hpp"
#include "giantstep/target.hpp"

namespace giantstep {

struct SpikeDirection {
  Eigen::VectorXd v;          // (1/n) sum y z
  Eigen::VectorXd v_teacher;  // W* v
  double c1_cosine = 0.0;     // cos(W* v, C_1); 0 when either vanishes
};

SpikeDirection compute_spike(const Dataset& data, const MultiIndexTarget& target);

// Moments of phi(z) = features(net, z) given z_v = <z, v_hat>, tabulated on
// a grid of z_v values.
struct ConditionalMoments {
  std::vector<double> grid;
  Eigen::VectorXd v_hat;
  std::vector<Eigen::VectorXd> mu;        // p
  std::vector<Eigen::MatrixXd> psi;       // p×d, zero action along v_hat
  std::vector<Eigen::MatrixXd> phi_sqrt;  // p×p symmetric PSD
  double clipped_fraction = 0.0;          // clipped negative mass / trace
  bool shrinkage_applied = false;
};

std::vector<double> uniform_grid(int knots = 65, double half_width = 4.0);

ConditionalMoments conditional_moments(const TwoLayerNet& net, const Eigen::VectorXd& v,
                                       const std::vector<double>& grid, int mc_samples,
                                       std::uint64_t seed);

// phi_CL(z) = mu(z_v) + Psi(z_v) z_perp + Phi^{1/2}(z_v) xi, one xi per row,
// moments interpolated linearly between knots and clamped at the ends.
Eigen::MatrixXd sample_cl_features(const Eigen::MatrixXd& Z, const ConditionalMoments& moments,
                                   std::uint64_t seed);

struct CgetOptions {
  int knots = 65;
  double half_width = 4.0;
  int mc_per_width = 100;  // samples per knot = mc_per_width * p
  int n_test = 10000;
};

struct CgetSeedResult {
  std::uint64_t seed = 0;
  double err_ck = 0.0;
  double err_cl = 0.0;
  double spike_cosine = 0.0;
  double a_ck_norm = 0.0;        // ||a||_2
  double a_ck_inf_scaled = 0.0;  // ||a||_inf p^{1/4}
  double a_cl_norm = 0.0;
  double a_cl_inf_scaled = 0.0;
  double clipped_fraction = 0.0;
};

// One giant step, then ridge on the trained features and on their
// conditional-linear surrogate, both evaluated on fresh test inputs.
std::vector<CgetSeedResult> compare_ck_cl(const MultiIndexTarget& target, const TrainConfig& config,
                                          double lambda, const std::vector<std::uint64_t>& seeds,
                                          const CgetOptions& options = {});

// ||P_{U,>1} f*||^2: mass of f* that is not affine in the coordinates
// orthogonal to U once P_U z is fixed. Monte Carlo over z in R^r.
McEstimate conditionally_nonlinear_mass(const MultiIndexTarget& target, const Subspace& U,
                                        int mc_samples, std::uint64_t seed);

// Exact value of the same quantity for a polynomial link (Gaussian moments).
double conditionally_nonlinear_mass_exact(const Polynomial& g, const Subspace& U);

struct LowerBoundCheck {
  double bound = 0.0;
  double std_error = 0.0;
  bool holds = false;
};

// predictor_err >= bound - tol.
LowerBoundCheck lower_bound_check(const MultiIndexTarget& target, const Subspace& U,
                                  double predictor_err, double tol,
                                  int mc_samples = 200000, std::uint64_t seed = 0);

}  // namespace giantstep
