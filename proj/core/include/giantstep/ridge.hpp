#pragma once

#include <Eigen/Dense>

#include "giantstep/target.hpp"

namespace giantstep {

// argmin_a ||X a - y||^2 + lambda ||a||^2. Uses the dual form
// X^T (X X^T + lambda I)^{-1} y when n < p and the primal form otherwise.
// lambda = 0 falls back to the minimum-norm least-squares solution and
// prints a warning.
Eigen::VectorXd ridge_second_layer(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                                   double lambda);
Eigen::VectorXd ridge_primal(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, double lambda);
Eigen::VectorXd ridge_dual(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, double lambda);

// Kernel ridge with K(x, x') = (1 + <x, x'>/d)^degree; returns test MSE.
double kernel_ridge_baseline(const Dataset& train, int degree, double lambda,
                             const Dataset& test);

}  // namespace giantstep
