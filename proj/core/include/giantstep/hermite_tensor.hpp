#pragma once

#include <vector>

#include <Eigen/Dense>

#include "giantstep/polynomial.hpp"
#include "giantstep/target.hpp"

namespace giantstep {

// Dense order-k tensor over R^dim, row-major (last index fastest).
// Normalization convention is documented in hermite.hpp.
class HermiteTensor {
 public:
  HermiteTensor() = default;
  HermiteTensor(int order, int dim);
  HermiteTensor(int order, std::vector<int> shape);

  int order() const { return static_cast<int>(shape_.size()); }
  // Size of the first mode (all modes for symmetric tensors).
  int dim() const { return shape_.empty() ? 0 : shape_.front(); }
  const std::vector<int>& shape() const { return shape_; }
  std::size_t size() const { return data_.size(); }
  const std::vector<double>& entries() const { return data_; }
  std::vector<double>& entries() { return data_; }

  double& at(const std::vector<int>& idx);
  double at(const std::vector<int>& idx) const;
  std::vector<int> unflatten(std::size_t flat) const;

  double frobenius_norm() const;
  bool is_symmetric(double tol = 1e-12) const;
  // Mode-1 unfolding: dim × (product of the other modes).
  Eigen::MatrixXd unfolding() const;
  // T ×_1 M ×_2 M ... ×_k M, i.e. every index contracted with the columns of M.
  HermiteTensor multiply_all_modes(const Eigen::MatrixXd& M) const;

 private:
  std::size_t flatten(const std::vector<int>& idx) const;

  std::vector<int> shape_;
  std::vector<double> data_;
};

HermiteTensor hermite_tensor(const Polynomial& g, int k);
HermiteTensor hermite_tensor(const MultiIndexTarget& target, int k);

// Smallest k >= 1 with ||C_k||_F > 1e-10. Throws std::domain_error for
// constant links.
int leap_index(const Polynomial& g);
int leap_index(const MultiIndexTarget& target);

struct Hosvd {
  Eigen::MatrixXd vectors;  // dim × rank, orthonormal columns
  HermiteTensor core;       // order k over R^rank
  int rank = 0;

  HermiteTensor reconstruct(int dim) const;
};

// Symmetric HOSVD from the SVD of the mode-1 unfolding; singular values
// below rel_cut * sigma_max are dropped. A zero tensor gives rank 0.
Hosvd hosvd(const HermiteTensor& C, double rel_cut = 1e-10);

}  // namespace giantstep
