#include "giantstep/subspace.hpp"

#include <stdexcept>

namespace giantstep {

Subspace Subspace::span(const Eigen::MatrixXd& columns, double drop_tol) {
  Subspace s(static_cast<int>(columns.rows()));
  std::vector<Eigen::VectorXd> vs;
  for (Eigen::Index j = 0; j < columns.cols(); ++j) vs.push_back(columns.col(j));
  s.extend(vs, drop_tol);
  return s;
}

Subspace Subspace::full(int ambient) {
  Subspace s(ambient);
  s.basis_ = Eigen::MatrixXd::Identity(ambient, ambient);
  return s;
}

int Subspace::extend(const std::vector<Eigen::VectorXd>& vectors, double drop_tol) {
  int added = 0;
  for (const auto& v : vectors) {
    if (v.size() != basis_.rows()) throw std::invalid_argument("Subspace::extend: size mismatch");
    const double n0 = v.norm();
    if (n0 == 0.0 || dim() == ambient()) continue;
    Eigen::VectorXd w = v;
    // Two MGS passes keep orthogonality at machine precision.
    for (int pass = 0; pass < 2; ++pass)
      for (int j = 0; j < dim(); ++j) w -= basis_.col(j).dot(w) * basis_.col(j);
    const double n1 = w.norm();
    if (n1 <= drop_tol * n0) continue;
    basis_.conservativeResize(Eigen::NoChange, dim() + 1);
    basis_.col(dim() - 1) = w / n1;
    ++added;
  }
  return added;
}

Eigen::MatrixXd Subspace::complement() const {
  Subspace c = *this;
  std::vector<Eigen::VectorXd> es;
  for (int i = 0; i < ambient(); ++i) es.push_back(Eigen::VectorXd::Unit(ambient(), i));
  c.extend(es, 1e-8);
  return c.basis_.rightCols(ambient() - dim());
}

bool Subspace::contains(const Eigen::VectorXd& v, double tol) const {
  Eigen::VectorXd r = v - basis_ * (basis_.transpose() * v);
  return r.norm() <= tol * std::max(1.0, v.norm());
}

bool Subspace::same_as(const Subspace& other, double tol) const {
  if (other.dim() != dim() || other.ambient() != ambient()) return false;
  return (projector() - other.projector()).norm() <= tol;
}

}  // namespace giantstep
