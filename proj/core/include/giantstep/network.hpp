#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "giantstep/activation.hpp"
#include "giantstep/target.hpp"

namespace giantstep {

enum class SecondLayerInit {
  uniform,   // sqrt(p) a_i ~ Unif[-1, 1]
  gaussian,  // sqrt(p) a_i ~ N(0, 1)
  sign,      // sqrt(p) a_i = +-1
};

SecondLayerInit parse_second_layer_init(const std::string& name);
std::string to_string(SecondLayerInit init);

// f(z) = (1/sqrt(p)) sum_i a_i sigma(<w_i, z>)
struct TwoLayerNet {
  Eigen::MatrixXd first_layer;   // p×d
  Eigen::VectorXd second_layer;  // p
  Activation activation = Activation::relu();

  int width() const { return static_cast<int>(first_layer.rows()); }
  int input_dim() const { return static_cast<int>(first_layer.cols()); }
};

// Rows on the unit sphere with w_i = w_{p-1-i} and a_i = -a_{p-1-i}
// (0-based), so the network output is zero at initialization.
TwoLayerNet init_symmetric(int p, int d, std::uint64_t seed, SecondLayerInit dist,
                           Activation activation = Activation::relu());

Eigen::VectorXd forward(const TwoLayerNet& net, const Eigen::MatrixXd& Z);
// sigma(Z W^T) / sqrt(p): regressing y on these with coefficients a gives the
// network output for second layer a.
Eigen::MatrixXd features(const TwoLayerNet& net, const Eigen::MatrixXd& Z);

// Descent direction G (W <- W - eta G), row i equal to
//   (a_i / sqrt(p)) (1/n) sum_nu z_nu sigma'(<w_i, z_nu>) (f(z_nu) - y_nu),
// the gradient of the half-MSE (1/2n) sum (f - y)^2. The "negative gradient"
// g_i of the spike+bulk analysis is -G_i.
Eigen::MatrixXd gradient_matrix(const TwoLayerNet& net, const Dataset& batch);
double half_mse(const TwoLayerNet& net, const Dataset& batch);

struct LearningRate {
  enum class Rule {
    theorem2,     // p d^((l-1)/2), param = l
    alg1_scaled,  // c p sqrt(n/d), param = c
    per_width,    // c p, param = c
    fixed,        // param
  };
  Rule rule = Rule::alg1_scaled;
  double param = 5.0;

  double value(int p, int d, int n) const;
  std::string describe() const;
  static LearningRate parse(const std::string& rule, double param);
};

struct TrainConfig {
  int d = 64;
  int p = 64;
  int n = 256;
  int T = 1;
  LearningRate eta;
  double lambda = 1.0;
  std::uint64_t seed = 0;
  std::optional<int> preprocess_degree;
  SecondLayerInit second_layer_dist = SecondLayerInit::uniform;
  Activation activation = Activation::relu();
  // Fit the second layer by ridge after every step (recorded in the trace;
  // the gradient still uses a^0).
  bool retrain_second_layer = false;
  bool allow_zero_lambda = false;
  bool keep_snapshots = true;

  // Throws std::invalid_argument naming the offending field.
  void validate() const;
};

struct GDTrace {
  std::vector<Eigen::MatrixXd> snapshots;      // W^0..W^T
  std::vector<Eigen::MatrixXd> gradients;      // G_0..G_{T-1}
  std::vector<std::uint64_t> batch_seeds;      // one per step
  std::vector<Eigen::VectorXd> second_layers;  // only with retrain_second_layer
};

std::uint64_t batch_seed(std::uint64_t seed, int step);

// T giant steps W^{t+1} = W^t - eta G_t on fresh batches; a stays at a^0.
GDTrace train_first_layer(TwoLayerNet& net, const MultiIndexTarget& target,
                          const TrainConfig& config);

}  // namespace giantstep
