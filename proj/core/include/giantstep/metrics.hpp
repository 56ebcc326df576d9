#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "giantstep/activation.hpp"
#include "giantstep/network.hpp"
#include "giantstep/subspace.hpp"
#include "giantstep/target.hpp"

namespace giantstep {

struct NeuronAlignment {
  Eigen::VectorXd overlap;                // W* w_i
  std::optional<Eigen::VectorXd> cosine;  // cos(w_i, w*_k); empty for a zero row
  double ratio = 0.0;                     // ||W* w_i||^2 / ||w_i||^2
  double norm = 0.0;                      // ||w_i||
};

struct AlignmentReport {
  std::vector<NeuronAlignment> neurons;

  Eigen::VectorXd ratios() const;
};

AlignmentReport alignment_report(const Eigen::MatrixXd& W, const Eigen::MatrixXd& teacher);
AlignmentReport alignment_report(const Eigen::MatrixXd& W, const MultiIndexTarget& target);

// g = u v^T + Delta with u = (mu1 / sqrt(p)) a and v = (1/n) sum y z.
// `g` is the negative gradient, i.e. -gradient_matrix(net, batch).
struct SpikeBulk {
  Eigen::VectorXd u;
  Eigen::VectorXd v;
  Eigen::MatrixXd delta;
};

SpikeBulk spike_bulk(const Eigen::MatrixXd& g, const Eigen::VectorXd& a, const Dataset& batch,
                     double mu1);

// Second moment of the first-step negative gradient of a neuron orthogonal
// to V*, estimated by Monte Carlo in the reduced coordinates (w.z, W* z):
//   E||g_i||^2 = (a_i^2 / p) K,
//   K = ((n-1)/n) ||E[z s'(w.z) f]||^2 + (1/n) E[||z||^2 s'(w.z)^2 f^2],
// and E<w, g_i> = (a_i / sqrt(p)) m_w with m_w = E[(w.z) s'(w.z) f].
struct NormConstant {
  double K = 0.0;
  double m_w = 0.0;
  int n = 0;
  int d = 0;
};

NormConstant norm_constant_oracle(const Activation& student, const MultiIndexTarget& target,
                                  int n, int d, int mc_samples, std::uint64_t seed);

struct NormConcentrationReport {
  Eigen::VectorXd predicted;  // 1 + eta C (sqrt(p) a_i)^2 + 2 eta (a_i/sqrt(p)) m_w
  Eigen::VectorXd measured;   // ||w_i^1||^2
  Eigen::VectorXd relative_deviation;
  double median_relative_deviation = 0.0;
  double C = 0.0;  // eta K / p^2
};

NormConcentrationReport norm_concentration_check(const GDTrace& trace, const TrainConfig& config,
                                                 const Eigen::VectorXd& a0,
                                                 const NormConstant& oracle);

// Ratio s = ||P_V* w^1|| / ||P_perp w^1|| after one giant step of size
// eta = eta_over_p * p with |sqrt(p) a| = 1, n = n_over_d * d, at leading
// order in d.
double second_step_shift_ratio(const Activation& student, double eta_over_p, double n_over_d,
                               const MultiIndexTarget& target);

// Predicted in-subspace orientation of the second-step negative gradient
// (times sign(a)) for a relu student with shift ratio s: direction of
// E[f*(z) Phi(a s x) W* z], x = <v*, W* z>, v* = C_1 / ||C_1||, expanded with
// the Hermite series of erf. Unit r-vector in teacher coordinates.
Eigen::VectorXd predicted_second_step_orientation(const Activation& student, int a_sign,
                                                  double shift_ratio,
                                                  const MultiIndexTarget& target);
// Convenience overload computing the shift ratio from the step size.
Eigen::VectorXd predicted_second_step_orientation(const Activation& student, int a_sign,
                                                  double eta_over_p, double n_over_d,
                                                  const MultiIndexTarget& target);

struct ThresholdRule {
  // c = 4 puts tau above 1 for d below ~700, where no row can qualify.
  double c = 1.0;
  double tau(int d) const;  // c log(d) / sqrt(d)
};

Subspace recover_learned_subspace(const Eigen::MatrixXd& W, const MultiIndexTarget& target,
                                  const ThresholdRule& rule = {});

using Predictor = std::function<Eigen::VectorXd(const Eigen::MatrixXd&)>;

struct ErrorEstimate {
  double mse = 0.0;
  double std_error = 0.0;
};

ErrorEstimate generalization_error(const Predictor& predictor, const MultiIndexTarget& target,
                                   int n_test, std::uint64_t seed, bool normalize = false);

double median(std::vector<double> values);
// Least-squares slope of log(y) against log(x).
double loglog_slope(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace giantstep
