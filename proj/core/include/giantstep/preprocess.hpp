#pragma once

#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "giantstep/network.hpp"
#include "giantstep/target.hpp"

namespace giantstep {

// prod_{(i, j) in factors} He_j(z_i) with its plug-in coefficient
// c_hat = (1/n) sum y He(z). The subtracted part is c_hat / prod j! times
// the product.
struct HermiteTerm {
  std::vector<std::pair<int, int>> factors;  // (coordinate, order), sorted
  double coefficient = 0.0;

  int total_degree() const;
  double norm() const;  // prod j!
};

struct PreprocessTable {
  int degree_bound = 0;  // terms have total degree < degree_bound
  std::vector<HermiteTerm> terms;

  // sum c_hat / prod j! * prod He, evaluated on rows of Z.
  Eigen::VectorXd evaluate(const Eigen::MatrixXd& Z) const;
};

struct PreprocessResult {
  Eigen::VectorXd labels;
  PreprocessTable table;
};

// All multi-indices over d coordinates with total degree < k, degree 0
// first (the constant term, i.e. the empirical mean).
std::vector<HermiteTerm> hermite_multi_indices(int d, int k);

// Plug-in estimates (1/n) sum y prod He for each term.
void estimate_coefficients(const Eigen::MatrixXd& Z, const Eigen::VectorXd& y,
                           std::vector<HermiteTerm>& terms);

PreprocessResult preprocess_labels(const Dataset& data, int k);

// (1/sqrt(p)) a_hat^T sigma(W z) plus the table's part, if any.
Eigen::VectorXd predict_with_reinjection(const TwoLayerNet& net, const Eigen::VectorXd& a_hat,
                                         const PreprocessTable* table,
                                         const Eigen::MatrixXd& Z);

}  // namespace giantstep
