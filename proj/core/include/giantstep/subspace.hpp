#pragma once

#include <vector>

#include <Eigen/Dense>

namespace giantstep {

// Subspace of R^ambient held as an orthonormal basis (columns).
class Subspace {
 public:
  explicit Subspace(int ambient = 0) : basis_(ambient, 0) {}
  // Orthonormalizes the given columns (modified Gram-Schmidt, drop tol).
  static Subspace span(const Eigen::MatrixXd& columns, double drop_tol = 1e-10);
  static Subspace full(int ambient);

  int ambient() const { return static_cast<int>(basis_.rows()); }
  int dim() const { return static_cast<int>(basis_.cols()); }
  const Eigen::MatrixXd& basis() const { return basis_; }

  // Appends the component of each vector orthogonal to the current basis
  // when its norm exceeds drop_tol * (norm of the input). Returns the number
  // of directions added. Existing basis vectors are never modified.
  int extend(const std::vector<Eigen::VectorXd>& vectors, double drop_tol = 1e-10);

  Eigen::MatrixXd projector() const { return basis_ * basis_.transpose(); }
  // Orthonormal basis of the orthogonal complement.
  Eigen::MatrixXd complement() const;
  bool contains(const Eigen::VectorXd& v, double tol = 1e-8) const;
  bool same_as(const Subspace& other, double tol = 1e-8) const;

 private:
  Eigen::MatrixXd basis_;
};

}  // namespace giantstep
