#include "giantstep/hermite_tensor.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <stdexcept>

#include "giantstep/hermite.hpp"

namespace giantstep {

HermiteTensor::HermiteTensor(int order, int dim)
    : HermiteTensor(order, std::vector<int>(order, dim)) {}

HermiteTensor::HermiteTensor(int order, std::vector<int> shape) : shape_(std::move(shape)) {
  if (order < 0 || static_cast<int>(shape_.size()) != order)
    throw std::invalid_argument("HermiteTensor: bad order/shape");
  std::size_t n = 1;
  for (int s : shape_) n *= static_cast<std::size_t>(s);
  data_.assign(n, 0.0);
}

std::size_t HermiteTensor::flatten(const std::vector<int>& idx) const {
  if (idx.size() != shape_.size()) throw std::out_of_range("tensor index has wrong order");
  std::size_t f = 0;
  for (std::size_t m = 0; m < idx.size(); ++m) {
    if (idx[m] < 0 || idx[m] >= shape_[m]) throw std::out_of_range("tensor index out of range");
    f = f * shape_[m] + idx[m];
  }
  return f;
}

std::vector<int> HermiteTensor::unflatten(std::size_t flat) const {
  std::vector<int> idx(shape_.size());
  for (int m = order() - 1; m >= 0; --m) {
    idx[m] = static_cast<int>(flat % shape_[m]);
    flat /= shape_[m];
  }
  return idx;
}

double& HermiteTensor::at(const std::vector<int>& idx) { return data_[flatten(idx)]; }
double HermiteTensor::at(const std::vector<int>& idx) const { return data_[flatten(idx)]; }

double HermiteTensor::frobenius_norm() const {
  double s = 0.0;
  for (double v : data_) s += v * v;
  return std::sqrt(s);
}

bool HermiteTensor::is_symmetric(double tol) const {
  for (std::size_t f = 0; f < data_.size(); ++f) {
    auto idx = unflatten(f);
    std::sort(idx.begin(), idx.end());
    if (std::abs(data_[f] - at(idx)) > tol) return false;
  }
  return true;
}

Eigen::MatrixXd HermiteTensor::unfolding() const {
  if (order() == 0) return Eigen::MatrixXd::Constant(1, 1, data_.front());
  const Eigen::Index rows = shape_.front();
  const Eigen::Index cols = static_cast<Eigen::Index>(data_.size()) / rows;
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = data_[i * cols + j];
  return m;
}

HermiteTensor HermiteTensor::multiply_all_modes(const Eigen::MatrixXd& M) const {
  std::vector<int> shape = shape_;
  std::vector<double> cur = data_;
  for (int mode = 0; mode < order(); ++mode) {
    if (M.cols() != shape[mode]) throw std::invalid_argument("mode product: size mismatch");
    std::size_t outer = 1, inner = 1;
    for (int m = 0; m < mode; ++m) outer *= shape[m];
    for (int m = mode + 1; m < order(); ++m) inner *= shape[m];
    const int n = shape[mode];
    const int nn = static_cast<int>(M.rows());
    std::vector<double> next(outer * nn * inner, 0.0);
    for (std::size_t o = 0; o < outer; ++o)
      for (int a = 0; a < nn; ++a)
        for (int j = 0; j < n; ++j) {
          const double w = M(a, j);
          if (w == 0.0) continue;
          const double* src = &cur[(o * n + j) * inner];
          double* dst = &next[(o * nn + a) * inner];
          for (std::size_t q = 0; q < inner; ++q) dst[q] += w * src[q];
        }
    shape[mode] = nn;
    cur = std::move(next);
  }
  HermiteTensor out(order(), shape);
  out.data_ = std::move(cur);
  return out;
}

HermiteTensor hermite_tensor(const Polynomial& g, int k) {
  if (k < 0) throw std::invalid_argument("hermite_tensor: k must be >= 0");
  const int r = g.num_vars();
  HermiteTensor C(k, r);
  const double norm = 1.0 / std::sqrt(factorial(k));
  std::map<std::vector<int>, double> cache;
  for (std::size_t f = 0; f < C.size(); ++f) {
    const auto idx = C.unflatten(f);
    std::vector<int> alpha(r, 0);
    for (int i : idx) ++alpha[i];
    auto it = cache.find(alpha);
    if (it == cache.end()) it = cache.emplace(alpha, product_hermite_coeff(g, alpha) * norm).first;
    C.entries()[f] = it->second;
  }
  return C;
}

HermiteTensor hermite_tensor(const MultiIndexTarget& target, int k) {
  return hermite_tensor(target.polynomial_link(), k);
}

int leap_index(const Polynomial& g) {
  for (int k = 1; k <= g.degree(); ++k)
    if (hermite_tensor(g, k).frobenius_norm() > 1e-10) return k;
  throw std::domain_error("leap index undefined for a constant link");
}

int leap_index(const MultiIndexTarget& target) { return leap_index(target.polynomial_link()); }

HermiteTensor Hosvd::reconstruct(int dim) const {
  if (rank == 0) return HermiteTensor(core.order(), dim);
  return core.multiply_all_modes(vectors);
}

Hosvd hosvd(const HermiteTensor& C, double rel_cut) {
  if (C.order() < 1) throw std::invalid_argument("hosvd needs order >= 1");
  Hosvd out;
  const Eigen::MatrixXd unf = C.unfolding();
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(unf, Eigen::ComputeFullU);
  const auto& s = svd.singularValues();
  const double smax = s.size() ? s(0) : 0.0;
  if (smax == 0.0) {
    out.vectors = Eigen::MatrixXd(C.dim(), 0);
    out.core = HermiteTensor(C.order(), std::vector<int>(C.order(), 0));
    return out;
  }
  while (out.rank < s.size() && s(out.rank) > rel_cut * smax) ++out.rank;
  out.vectors = svd.matrixU().leftCols(out.rank);
  // Sign convention: largest-magnitude entry of each vector positive.
  for (int j = 0; j < out.rank; ++j) {
    Eigen::Index i;
    out.vectors.col(j).cwiseAbs().maxCoeff(&i);
    if (out.vectors(i, j) < 0) out.vectors.col(j) *= -1.0;
  }
  out.core = C.multiply_all_modes(out.vectors.transpose());
  return out;
}

}  // namespace giantstep
