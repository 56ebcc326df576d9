#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "giantstep/activation.hpp"
#include "giantstep/polynomial.hpp"
#include "giantstep/rng.hpp"
#include "giantstep/subspace.hpp"

namespace giantstep {

// f*(z) = g*(W* z) with W* an r×d matrix with orthonormal rows. The link g*
// is either a polynomial in r variables or a sum of per-direction scalar
// activations g*(x) = sum_k sigma_k(x_k).
class MultiIndexTarget {
 public:
  MultiIndexTarget(Eigen::MatrixXd teacher, Polynomial link);
  MultiIndexTarget(Eigen::MatrixXd teacher, std::vector<Activation> components);

  // Teacher rows e_1..e_r of R^d.
  static Eigen::MatrixXd aligned_teacher(int r, int d);
  // Haar-random orthonormal rows.
  static Eigen::MatrixXd random_teacher(int r, int d, std::uint64_t seed);

  int r() const { return static_cast<int>(teacher_.rows()); }
  int d() const { return static_cast<int>(teacher_.cols()); }
  const Eigen::MatrixXd& teacher() const { return teacher_; }

  bool has_polynomial_link() const { return poly_.has_value(); }
  // Throws std::logic_error for named-activation links.
  const Polynomial& polynomial_link() const;
  const std::vector<Activation>& components() const { return components_; }
  // The polynomial link itself, or each component replaced by its degree-
  // `degree` Hermite truncation.
  Polynomial polynomial_approximation(int degree = 8) const;

  // Same link, new teacher (used to move a target to another dimension).
  MultiIndexTarget with_teacher(Eigen::MatrixXd teacher) const;

  // g* on rows of teacher coordinates (n×r).
  Eigen::VectorXd link_rows(const Eigen::MatrixXd& teacher_coords) const;
  // f* on rows of inputs (n×d).
  Eigen::VectorXd evaluate(const Eigen::MatrixXd& inputs) const;

  double mean() const;
  double variance() const;

 private:
  Eigen::MatrixXd teacher_;
  std::optional<Polynomial> poly_;
  std::vector<Activation> components_;
};

struct Dataset {
  Eigen::MatrixXd inputs;  // n×d
  Eigen::VectorXd labels;  // n
};

// Inputs are drawn in row blocks from substreams of `seed`, so the rows do
// not depend on how the work is scheduled.
Dataset sample_dataset(const MultiIndexTarget& target, int n, int d, std::uint64_t seed);

struct McEstimate {
  double value = 0.0;
  double std_error = 0.0;
};

// E[Var(f*(z) | P_U z)] for U in teacher coordinates, estimated with the
// paired estimator (f(x_U, x) - f(x_U, x'))^2 / 2.
McEstimate conditional_variance(const MultiIndexTarget& target, const Subspace& U,
                                int mc_samples, std::uint64_t seed);

}  // namespace giantstep
