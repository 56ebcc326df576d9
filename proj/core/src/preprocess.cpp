#include "giantstep/preprocess.hpp"

#include <functional>
#include <stdexcept>

#include "giantstep/hermite.hpp"

namespace giantstep {

int HermiteTerm::total_degree() const {
  int s = 0;
  for (const auto& [i, j] : factors) s += j;
  return s;
}

double HermiteTerm::norm() const {
  double s = 1.0;
  for (const auto& [i, j] : factors) s *= factorial(j);
  return s;
}

namespace {

// Column i of H[j] holds He_j(Z(:, i)).
std::vector<Eigen::ArrayXXd> hermite_columns(const Eigen::MatrixXd& Z, int max_order) {
  std::vector<Eigen::ArrayXXd> H;
  H.push_back(Eigen::ArrayXXd::Ones(Z.rows(), Z.cols()));
  if (max_order >= 1) H.push_back(Z.array());
  for (int j = 1; j < max_order; ++j) H.push_back(Z.array() * H[j] - j * H[j - 1]);
  return H;
}

int max_order(const std::vector<HermiteTerm>& terms) {
  int m = 0;
  for (const auto& t : terms)
    for (const auto& [i, j] : t.factors) m = std::max(m, j);
  return m;
}

Eigen::ArrayXd term_values(const HermiteTerm& t, const std::vector<Eigen::ArrayXXd>& H, Eigen::Index n) {
  Eigen::ArrayXd v = Eigen::ArrayXd::Ones(n);
  for (const auto& [i, j] : t.factors) v *= H[j].col(i);
  return v;
}

}  // namespace

std::vector<HermiteTerm> hermite_multi_indices(int d, int k) {
  if (k < 1) throw std::invalid_argument("preprocessing degree k must be >= 1");
  std::vector<HermiteTerm> out;
  for (int deg = 0; deg < k; ++deg) {
    // Enumerate sorted coordinate tuples i_1 <= ... <= i_deg and merge repeats.
    std::vector<int> idx;
    std::function<void(int, int)> rec = [&](int start, int left) {
      if (left == 0) {
        HermiteTerm t;
        for (int c : idx) {
          if (!t.factors.empty() && t.factors.back().first == c) ++t.factors.back().second;
          else t.factors.emplace_back(c, 1);
        }
        out.push_back(std::move(t));
        return;
      }
      for (int c = start; c < d; ++c) {
        idx.push_back(c);
        rec(c, left - 1);
        idx.pop_back();
      }
    };
    rec(0, deg);
  }
  return out;
}

void estimate_coefficients(const Eigen::MatrixXd& Z, const Eigen::VectorXd& y,
                           std::vector<HermiteTerm>& terms) {
  const auto H = hermite_columns(Z, max_order(terms));
  const double n = static_cast<double>(Z.rows());
  for (auto& t : terms) t.coefficient = (term_values(t, H, Z.rows()) * y.array()).sum() / n;
}

Eigen::VectorXd PreprocessTable::evaluate(const Eigen::MatrixXd& Z) const {
  const auto H = hermite_columns(Z, max_order(terms));
  Eigen::ArrayXd out = Eigen::ArrayXd::Zero(Z.rows());
  for (const auto& t : terms) out += (t.coefficient / t.norm()) * term_values(t, H, Z.rows());
  return out.matrix();
}

PreprocessResult preprocess_labels(const Dataset& data, int k) {
  PreprocessResult res;
  res.table.degree_bound = k;
  res.table.terms = hermite_multi_indices(static_cast<int>(data.inputs.cols()), k);
  estimate_coefficients(data.inputs, data.labels, res.table.terms);
  res.labels = data.labels - res.table.evaluate(data.inputs);
  return res;
}

Eigen::VectorXd predict_with_reinjection(const TwoLayerNet& net, const Eigen::VectorXd& a_hat,
                                         const PreprocessTable* table, const Eigen::MatrixXd& Z) {
  Eigen::VectorXd out = features(net, Z) * a_hat;
  if (table) out += table->evaluate(Z);
  return out;
}

}  // namespace giantstep
