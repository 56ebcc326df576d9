#include "giantstep/ridge.hpp"

#include <cmath>
#include <iostream>
#include <stdexcept>

#include "giantstep/errors.hpp"

namespace giantstep {

namespace {

Eigen::VectorXd solve_spd(Eigen::MatrixXd A, const Eigen::VectorXd& b) {
  Eigen::LLT<Eigen::MatrixXd> llt(A);
  if (llt.info() == Eigen::Success) return llt.solve(b);
  Eigen::LDLT<Eigen::MatrixXd> ldlt(A);
  if (ldlt.info() != Eigen::Success) throw NumericalError("ridge system is not positive definite");
  return ldlt.solve(b);
}

void check(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, double lambda) {
  if (X.rows() != y.size()) throw std::invalid_argument("ridge: features and labels disagree on n");
  if (lambda < 0.0) throw std::invalid_argument("ridge: lambda must be >= 0");
}

}  // namespace

Eigen::VectorXd ridge_primal(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, double lambda) {
  check(X, y, lambda);
  Eigen::MatrixXd A = X.transpose() * X;
  A.diagonal().array() += lambda;
  return solve_spd(std::move(A), X.transpose() * y);
}

Eigen::VectorXd ridge_dual(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, double lambda) {
  check(X, y, lambda);
  Eigen::MatrixXd K = X * X.transpose();
  K.diagonal().array() += lambda;
  return X.transpose() * solve_spd(std::move(K), y);
}

Eigen::VectorXd ridge_second_layer(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                                   double lambda) {
  check(X, y, lambda);
  if (lambda == 0.0) {
    std::clog << "warning: ridge with lambda = 0, using the minimum-norm least-squares solution\n";
    return X.completeOrthogonalDecomposition().solve(y);
  }
  Eigen::VectorXd a = X.rows() < X.cols() ? ridge_dual(X, y, lambda) : ridge_primal(X, y, lambda);
  if (!a.allFinite()) throw NumericalError("ridge solution is not finite");
  return a;
}

double kernel_ridge_baseline(const Dataset& train, int degree, double lambda, const Dataset& test) {
  if (degree < 1 || degree > 3) throw std::invalid_argument("kernel degree must be 1, 2 or 3");
  if (train.inputs.cols() != test.inputs.cols()) throw std::invalid_argument("train/test dimension mismatch");
  const double d = static_cast<double>(train.inputs.cols());
  auto kernel = [&](const Eigen::MatrixXd& A, const Eigen::MatrixXd& B) {
    Eigen::ArrayXXd K = ((A * B.transpose()).array() / d + 1.0);
    Eigen::ArrayXXd out = K;
    for (int k = 1; k < degree; ++k) out *= K;
    return Eigen::MatrixXd(out.matrix());
  };
  Eigen::MatrixXd K = kernel(train.inputs, train.inputs);
  K.diagonal().array() += lambda;
  const Eigen::VectorXd alpha = solve_spd(std::move(K), train.labels);
  const Eigen::VectorXd pred = kernel(test.inputs, train.inputs) * alpha;
  return (pred - test.labels).squaredNorm() / static_cast<double>(test.labels.size());
}

}  // namespace giantstep
