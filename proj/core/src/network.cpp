#include "giantstep/network.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

#include "giantstep/preprocess.hpp"
#include "giantstep/ridge.hpp"

namespace giantstep {

SecondLayerInit parse_second_layer_init(const std::string& name) {
  if (name == "uniform") return SecondLayerInit::uniform;
  if (name == "gaussian") return SecondLayerInit::gaussian;
  if (name == "sign" || name == "rademacher") return SecondLayerInit::sign;
  throw std::invalid_argument("unknown second-layer distribution '" + name +
                              "' (expected uniform, gaussian or sign)");
}

std::string to_string(SecondLayerInit init) {
  switch (init) {
    case SecondLayerInit::uniform: return "uniform";
    case SecondLayerInit::gaussian: return "gaussian";
    case SecondLayerInit::sign: return "sign";
  }
  return "?";
}

TwoLayerNet init_symmetric(int p, int d, std::uint64_t seed, SecondLayerInit dist,
                           Activation activation) {
  if (p <= 0 || p % 2 != 0) throw std::invalid_argument("init_symmetric: p must be even and positive");
  if (d <= 0) throw std::invalid_argument("init_symmetric: d must be positive");
  TwoLayerNet net;
  net.activation = std::move(activation);
  net.first_layer.resize(p, d);
  net.second_layer.resize(p);
  Rng rng(seed, Stream::init);
  const double inv_sqrt_p = 1.0 / std::sqrt(static_cast<double>(p));
  for (int i = 0; i < p / 2; ++i) {
    Eigen::VectorXd w(d);
    for (int j = 0; j < d; ++j) w(j) = rng.normal();
    w /= w.norm();
    net.first_layer.row(i) = w.transpose();
    net.first_layer.row(p - 1 - i) = w.transpose();
  }
  for (int i = 0; i < p / 2; ++i) {
    double a = 0.0;
    switch (dist) {
      case SecondLayerInit::uniform: a = rng.uniform(-1.0, 1.0); break;
      case SecondLayerInit::gaussian: a = rng.normal(); break;
      case SecondLayerInit::sign: a = rng.uniform(0.0, 1.0) < 0.5 ? -1.0 : 1.0; break;
    }
    net.second_layer(i) = a * inv_sqrt_p;
    net.second_layer(p - 1 - i) = -a * inv_sqrt_p;
  }
  return net;
}

namespace {

void check_inputs(const TwoLayerNet& net, const Eigen::MatrixXd& Z) {
  if (Z.cols() != net.input_dim())
    throw std::invalid_argument("input has " + std::to_string(Z.cols()) +
                                " columns, network expects " + std::to_string(net.input_dim()));
  if (net.second_layer.size() != net.width())
    throw std::invalid_argument("second layer size does not match width");
}

}  // namespace

Eigen::MatrixXd features(const TwoLayerNet& net, const Eigen::MatrixXd& Z) {
  check_inputs(net, Z);
  const Eigen::MatrixXd H = Z * net.first_layer.transpose();
  return net.activation.apply(H.array()).matrix() / std::sqrt(static_cast<double>(net.width()));
}

Eigen::VectorXd forward(const TwoLayerNet& net, const Eigen::MatrixXd& Z) {
  return features(net, Z) * net.second_layer;
}

Eigen::MatrixXd gradient_matrix(const TwoLayerNet& net, const Dataset& batch) {
  check_inputs(net, batch.inputs);
  const Eigen::MatrixXd& Z = batch.inputs;
  const double n = static_cast<double>(Z.rows());
  const double inv_sqrt_p = 1.0 / std::sqrt(static_cast<double>(net.width()));
  const Eigen::ArrayXXd H = (Z * net.first_layer.transpose()).array();
  const Eigen::VectorXd pred = (net.activation.apply(H).matrix() * net.second_layer) * inv_sqrt_p;
  const Eigen::VectorXd resid = pred - batch.labels;
  const Eigen::MatrixXd M = (net.activation.apply_derivative(H).colwise() * resid.array()).matrix();
  Eigen::MatrixXd G = M.transpose() * Z;
  G.array().colwise() *= (net.second_layer.array() * (inv_sqrt_p / n));
  return G;
}

double half_mse(const TwoLayerNet& net, const Dataset& batch) {
  return 0.5 * (forward(net, batch.inputs) - batch.labels).squaredNorm() /
         static_cast<double>(batch.inputs.rows());
}

double LearningRate::value(int p, int d, int n) const {
  switch (rule) {
    case Rule::theorem2: return p * std::pow(static_cast<double>(d), (param - 1.0) / 2.0);
    case Rule::alg1_scaled: return param * p * std::sqrt(static_cast<double>(n) / d);
    case Rule::per_width: return param * p;
    case Rule::fixed: return param;
  }
  return 0.0;
}

std::string LearningRate::describe() const {
  std::ostringstream os;
  switch (rule) {
    case Rule::theorem2: os << "theorem2(l=" << param << ")"; break;
    case Rule::alg1_scaled: os << "alg1_scaled(c=" << param << ")"; break;
    case Rule::per_width: os << "per_width(c=" << param << ")"; break;
    case Rule::fixed: os << "fixed(" << param << ")"; break;
  }
  return os.str();
}

LearningRate LearningRate::parse(const std::string& rule, double param) {
  LearningRate lr;
  lr.param = param;
  if (rule == "theorem2") lr.rule = Rule::theorem2;
  else if (rule == "alg1_scaled") lr.rule = Rule::alg1_scaled;
  else if (rule == "per_width") lr.rule = Rule::per_width;
  else if (rule == "fixed") lr.rule = Rule::fixed;
  else
    throw std::invalid_argument("unknown learning-rate rule '" + rule +
                                "' (expected theorem2, alg1_scaled, per_width or fixed)");
  return lr;
}

void TrainConfig::validate() const {
  if (d < 1) throw std::invalid_argument("d must be >= 1");
  if (p < 2 || p % 2 != 0) throw std::invalid_argument("p must be even and >= 2");
  if (n < 1) throw std::invalid_argument("n must be >= 1");
  if (T < 0) throw std::invalid_argument("T must be >= 0");
  if (lambda < 0.0 || (lambda == 0.0 && !allow_zero_lambda))
    throw std::invalid_argument("lambda must be > 0 (set allow_zero_lambda for the pseudo-inverse)");
  if (preprocess_degree && *preprocess_degree < 1)
    throw std::invalid_argument("preprocess_degree must be >= 1");
}

std::uint64_t batch_seed(std::uint64_t seed, int step) {
  return derive_seed(seed, Stream::batch, static_cast<std::uint64_t>(step));
}

GDTrace train_first_layer(TwoLayerNet& net, const MultiIndexTarget& target,
                          const TrainConfig& config) {
  config.validate();
  if (net.input_dim() != target.d()) throw std::invalid_argument("network and target dimensions differ");
  GDTrace trace;
  const double eta = config.eta.value(net.width(), net.input_dim(), config.n);
  trace.snapshots.push_back(net.first_layer);
  for (int t = 0; t < config.T; ++t) {
    const std::uint64_t s = batch_seed(config.seed, t);
    Dataset batch = sample_dataset(target, config.n, target.d(), s);
    if (config.preprocess_degree) batch.labels = preprocess_labels(batch, *config.preprocess_degree).labels;
    Eigen::MatrixXd G = gradient_matrix(net, batch);
    net.first_layer -= eta * G;
    trace.batch_seeds.push_back(s);
    trace.gradients.push_back(std::move(G));
    if (config.keep_snapshots || t + 1 == config.T) trace.snapshots.push_back(net.first_layer);
    if (config.retrain_second_layer) {
      Dataset rb = sample_dataset(target, config.n, target.d(),
                                  derive_seed(config.seed, Stream::ridge_batch, t + 1));
      if (config.preprocess_degree) rb.labels = preprocess_labels(rb, *config.preprocess_degree).labels;
      trace.second_layers.push_back(ridge_second_layer(features(net, rb.inputs), rb.labels, config.lambda));
    }
  }
  return trace;
}

}  // namespace giantstep
