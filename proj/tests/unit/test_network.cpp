#include <gtest/gtest.h>

#include <cmath>
#include <cstring>
#include <random>

#include "giantstep/network.hpp"
#include "giantstep/pipeline.hpp"
#include "giantstep/preprocess.hpp"
#include "giantstep/ridge.hpp"

using namespace giantstep;

namespace {

MultiIndexTarget poly_target(const char* text, int d) {
  Polynomial g = Polynomial::parse(text);
  return MultiIndexTarget(MultiIndexTarget::aligned_teacher(g.num_vars(), d), g);
}

Eigen::MatrixXd random_matrix(int rows, int cols, unsigned seed) {
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> nd;
  Eigen::MatrixXd M(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) M(i, j) = nd(gen);
  return M;
}

}  // namespace

TEST(Init, PairsRowsAndOpposesSecondLayer) {
  const TwoLayerNet net = init_symmetric(4, 8, 1, SecondLayerInit::uniform);
  EXPECT_EQ(net.first_layer.row(0), net.first_layer.row(3));
  EXPECT_EQ(net.first_layer.row(1), net.first_layer.row(2));
  EXPECT_EQ(net.second_layer(0), -net.second_layer(3));
  EXPECT_EQ(net.second_layer(1), -net.second_layer(2));
}

TEST(Init, UnitRowsAndBoundedSecondLayer) {
  for (auto dist : {SecondLayerInit::uniform, SecondLayerInit::sign}) {
    const TwoLayerNet net = init_symmetric(64, 32, 2, dist);
    for (int i = 0; i < 64; ++i) {
      EXPECT_NEAR(net.first_layer.row(i).norm(), 1.0, 1e-12);
      EXPECT_LE(std::abs(net.second_layer(i)), 1.0 / 8.0 + 1e-15);
    }
  }
  const TwoLayerNet sign = init_symmetric(16, 4, 3, SecondLayerInit::sign);
  for (int i = 0; i < 16; ++i) EXPECT_DOUBLE_EQ(std::abs(sign.second_layer(i)), 0.25);
}

TEST(Init, RejectsOddWidth) {
  EXPECT_THROW(init_symmetric(5, 3, 0, SecondLayerInit::uniform), std::invalid_argument);
}

TEST(Init, DeterministicGivenSeed) {
  const auto a = init_symmetric(10, 6, 9, SecondLayerInit::gaussian);
  const auto b = init_symmetric(10, 6, 9, SecondLayerInit::gaussian);
  EXPECT_EQ(a.first_layer, b.first_layer);
  EXPECT_EQ(a.second_layer, b.second_layer);
  EXPECT_NE(init_symmetric(10, 6, 10, SecondLayerInit::gaussian).first_layer, a.first_layer);
}

TEST(Forward, ZeroAtSymmetricInit) {
  const auto net = init_symmetric(32, 16, 4, SecondLayerInit::uniform);
  const Eigen::VectorXd out = forward(net, random_matrix(100, 16, 5));
  EXPECT_LE(out.cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Forward, IdentityPairCancels) {
  TwoLayerNet net;
  net.activation = Activation::identity();
  net.first_layer = Eigen::MatrixXd(2, 3);
  net.first_layer << 0.3, -0.2, 1.0, 0.3, -0.2, 1.0;
  net.second_layer = Eigen::Vector2d(1 / std::sqrt(2.0), -1 / std::sqrt(2.0));
  EXPECT_LE(forward(net, random_matrix(5, 3, 6)).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(Forward, SingleNeuronByHand) {
  TwoLayerNet net;
  net.first_layer = Eigen::RowVector2d(1.0, -2.0);
  net.second_layer = Eigen::VectorXd::Constant(1, 3.0);
  Eigen::MatrixXd Z(3, 2);
  Z << 1.0, 0.0, 0.5, 1.0, -1.0, -1.0;
  const Eigen::VectorXd out = forward(net, Z);
  EXPECT_DOUBLE_EQ(out(0), 3.0);
  EXPECT_DOUBLE_EQ(out(1), 0.0);
  EXPECT_DOUBLE_EQ(out(2), 3.0);
  EXPECT_THROW(forward(net, Eigen::MatrixXd(2, 3)), std::invalid_argument);
}

TEST(Gradient, MatchesFiniteDifferences) {
  for (const char* act : {"relu", "poly(0.2,1,-0.5,0.3)", "tanh"}) {
    for (unsigned seed = 0; seed < 3; ++seed) {
      const int p = 8, d = 10, n = 64;
      TwoLayerNet net;
      net.activation = Activation::parse(act);
      net.first_layer = random_matrix(p, d, 100 + seed) / std::sqrt(double(d));
      net.second_layer = random_matrix(p, 1, 200 + seed).col(0) / std::sqrt(double(p));
      Dataset batch{random_matrix(n, d, 300 + seed), random_matrix(n, 1, 400 + seed).col(0)};
      const Eigen::MatrixXd G = gradient_matrix(net, batch);
      const double h = 1e-6;
      for (int i = 0; i < p; ++i)
        for (int j = 0; j < d; ++j) {
          TwoLayerNet plus = net, minus = net;
          plus.first_layer(i, j) += h;
          minus.first_layer(i, j) -= h;
          const double fd = (half_mse(plus, batch) - half_mse(minus, batch)) / (2 * h);
          EXPECT_LE(std::abs(fd - G(i, j)), 1e-4 * std::max(std::abs(fd), 1e-3))
              << act << " i=" << i << " j=" << j;
        }
    }
  }
}

TEST(Gradient, AtInitIsNegativeLabelCorrelation) {
  const auto net = init_symmetric(6, 5, 7, SecondLayerInit::uniform);
  const auto target = poly_target("z1 + z1*z2", 5);
  const Dataset batch = sample_dataset(target, 40, 5, 8);
  const Eigen::MatrixXd G = gradient_matrix(net, batch);
  const Eigen::ArrayXXd dsig = net.activation.apply_derivative((batch.inputs * net.first_layer.transpose()).array());
  for (int i = 0; i < 6; ++i) {
    Eigen::VectorXd g = Eigen::VectorXd::Zero(5);
    for (int nu = 0; nu < 40; ++nu) g += batch.inputs.row(nu).transpose() * dsig(nu, i) * batch.labels(nu);
    g *= net.second_layer(i) / std::sqrt(6.0) / 40.0;
    EXPECT_LE((G.row(i).transpose() + g).norm(), 1e-12);
  }
  // Paired rows receive opposite updates.
  for (int i = 0; i < 3; ++i) EXPECT_LE((G.row(i) + G.row(5 - i)).norm(), 1e-12);
}

TEST(Gradient, ZeroLabelsAtInitGiveZero) {
  const auto net = init_symmetric(8, 4, 1, SecondLayerInit::uniform);
  Dataset batch{random_matrix(20, 4, 2), Eigen::VectorXd::Zero(20)};
  EXPECT_LE(gradient_matrix(net, batch).cwiseAbs().maxCoeff(), 1e-14);
}

TEST(Training, ZeroStepsKeepsInitialization) {
  auto net = init_symmetric(8, 6, 1, SecondLayerInit::uniform);
  TrainConfig cfg;
  cfg.d = 6;
  cfg.p = 8;
  cfg.n = 30;
  cfg.T = 0;
  const auto trace = train_first_layer(net, poly_target("z1", 6), cfg);
  EXPECT_EQ(trace.snapshots.size(), 1u);
  EXPECT_TRUE(trace.gradients.empty());
}

TEST(Training, ZeroRateLeavesWeights) {
  auto net = init_symmetric(8, 6, 1, SecondLayerInit::uniform);
  const Eigen::MatrixXd W0 = net.first_layer;
  TrainConfig cfg;
  cfg.d = 6;
  cfg.p = 8;
  cfg.n = 30;
  cfg.T = 3;
  cfg.eta = LearningRate::parse("fixed", 0.0);
  const auto trace = train_first_layer(net, poly_target("z1", 6), cfg);
  EXPECT_EQ(trace.snapshots.size(), 4u);
  EXPECT_EQ(net.first_layer, W0);
}

TEST(Training, FreshBatchesAreDistinct) {
  auto net = init_symmetric(4, 5, 1, SecondLayerInit::uniform);
  TrainConfig cfg;
  cfg.d = 5;
  cfg.p = 4;
  cfg.n = 10;
  cfg.T = 4;
  const auto target = poly_target("z1", 5);
  const auto trace = train_first_layer(net, target, cfg);
  for (int s = 0; s < 4; ++s)
    for (int t = s + 1; t < 4; ++t) {
      EXPECT_NE(trace.batch_seeds[s], trace.batch_seeds[t]);
      const auto a = sample_dataset(target, 10, 5, trace.batch_seeds[s]).inputs;
      const auto b = sample_dataset(target, 10, 5, trace.batch_seeds[t]).inputs;
      EXPECT_NE(std::memcmp(a.data(), b.data(), sizeof(double) * a.size()), 0);
    }
}

TEST(Training, BitReproducibleReruns) {
  TrainConfig cfg;
  cfg.d = 16;
  cfg.p = 12;
  cfg.n = 64;
  cfg.T = 3;
  cfg.seed = 77;
  cfg.retrain_second_layer = true;
  const auto target = poly_target("z1 + z1*z2", 16);
  auto a = init_symmetric(12, 16, cfg.seed, SecondLayerInit::uniform);
  auto b = init_symmetric(12, 16, cfg.seed, SecondLayerInit::uniform);
  const auto ta = train_first_layer(a, target, cfg);
  const auto tb = train_first_layer(b, target, cfg);
  EXPECT_EQ(std::memcmp(a.first_layer.data(), b.first_layer.data(), sizeof(double) * a.first_layer.size()), 0);
  for (int t = 0; t < 3; ++t) EXPECT_EQ(ta.second_layers[t], tb.second_layers[t]);
  const auto ra = run_pipeline(target, cfg, 500);
  const auto rb = run_pipeline(target, cfg, 500);
  EXPECT_EQ(ra.test.mse, rb.test.mse);
  EXPECT_EQ(ra.a_hat, rb.a_hat);
}

TEST(Training, LinearTargetPullsRowsTowardSignedDirection) {
  const int d = 16, p = 8;
  auto net = init_symmetric(p, d, 3, SecondLayerInit::sign);
  TrainConfig cfg;
  cfg.d = d;
  cfg.p = p;
  cfg.n = 40000;
  cfg.T = 1;
  cfg.eta = LearningRate::parse("per_width", 1.0);
  const auto trace = train_first_layer(net, poly_target("z1", d), cfg);
  for (int i = 0; i < p; ++i) {
    const Eigen::RowVectorXd step = trace.snapshots[1].row(i) - trace.snapshots[0].row(i);
    const double cos = step(0) / step.norm();
    EXPECT_GT(cos * (net.second_layer(i) > 0 ? 1 : -1), 0.9) << i;
  }
}

TEST(Training, ConfigValidationNamesField) {
  TrainConfig cfg;
  cfg.p = 7;
  try {
    cfg.validate();
    FAIL();
  } catch (const std::invalid_argument& e) {
    EXPECT_NE(std::string(e.what()).find("p must"), std::string::npos);
  }
  cfg.p = 8;
  cfg.lambda = 0.0;
  EXPECT_THROW(cfg.validate(), std::invalid_argument);
  cfg.allow_zero_lambda = true;
  EXPECT_NO_THROW(cfg.validate());
}

TEST(LearningRate, Rules) {
  EXPECT_DOUBLE_EQ(LearningRate::parse("theorem2", 2).value(10, 64, 0), 80.0);
  EXPECT_DOUBLE_EQ(LearningRate::parse("alg1_scaled", 5).value(10, 64, 256), 100.0);
  EXPECT_DOUBLE_EQ(LearningRate::parse("per_width", 2).value(10, 64, 256), 20.0);
  EXPECT_THROW(LearningRate::parse("bogus", 1), std::invalid_argument);
}

TEST(Ridge, PrimalAndDualAgree) {
  for (auto [n, p] : {std::pair{30, 50}, std::pair{50, 30}, std::pair{40, 40}}) {
    const Eigen::MatrixXd X = random_matrix(n, p, n * 7 + p);
    const Eigen::VectorXd y = random_matrix(n, 1, 3).col(0);
    for (double lambda : {1e-3, 1.0, 50.0}) {
      const Eigen::VectorXd a = ridge_primal(X, y, lambda);
      const Eigen::VectorXd b = ridge_dual(X, y, lambda);
      EXPECT_LE((a - b).cwiseAbs().maxCoeff(), 1e-8 * std::max(1.0, a.cwiseAbs().maxCoeff()));
    }
  }
}

TEST(Ridge, ObjectiveGradientVanishes) {
  for (auto [n, p] : {std::pair{20, 60}, std::pair{80, 25}}) {
    const Eigen::MatrixXd X = random_matrix(n, p, n + p);
    const Eigen::VectorXd y = random_matrix(n, 1, 11).col(0);
    const double lambda = 0.5;
    const Eigen::VectorXd a = ridge_second_layer(X, y, lambda);
    const Eigen::VectorXd grad = 2 * X.transpose() * (X * a - y) + 2 * lambda * a;
    EXPECT_LE(grad.cwiseAbs().maxCoeff(), 1e-8);
  }
}

TEST(Ridge, HandComputedSystem) {
  // Normal equations (X^T X + I) a = X^T y with X = [[1,0],[0,1],[1,1]], y = (1,2,3).
  Eigen::MatrixXd X(3, 2);
  X << 1, 0, 0, 1, 1, 1;
  const Eigen::Vector3d y(1, 2, 3);
  const Eigen::VectorXd a = ridge_second_layer(X, y, 1.0);
  // [[3,1],[1,3]] a = (4,5) -> a = (7/8, 11/8)
  EXPECT_NEAR(a(0), 7.0 / 8.0, 1e-14);
  EXPECT_NEAR(a(1), 11.0 / 8.0, 1e-14);
}

TEST(Ridge, InterpolatesAndShrinks) {
  const Eigen::MatrixXd X = random_matrix(60, 10, 4);
  const Eigen::VectorXd a0 = random_matrix(10, 1, 5).col(0);
  const Eigen::VectorXd y = X * a0;
  EXPECT_LE((ridge_second_layer(X, y, 1e-12) - a0).cwiseAbs().maxCoeff(), 1e-6);
  EXPECT_LE(ridge_second_layer(X, y, 1e12).norm(), 1e-8);
  EXPECT_LE((ridge_second_layer(X, y, 0.0) - a0).cwiseAbs().maxCoeff(), 1e-8);
}

TEST(KernelBaseline, LinearKernelFitsLinearTarget) {
  const auto t = poly_target("z1", 8);
  const double mse = kernel_ridge_baseline(sample_dataset(t, 2000, 8, 1), 1, 1e-6, sample_dataset(t, 2000, 8, 2));
  EXPECT_LT(mse, 1e-3);
}

TEST(KernelBaseline, LinearKernelMissesSecondHermite) {
  const auto t = poly_target("He2(z1)", 8);
  const double mse = kernel_ridge_baseline(sample_dataset(t, 2000, 8, 3), 1, 1e-6, sample_dataset(t, 4000, 8, 4));
  EXPECT_NEAR(mse, 2.0, 0.2);
}

TEST(KernelBaseline, QuadraticKernelFitsProduct) {
  const auto t = poly_target("z1*z2", 16);
  const double mse = kernel_ridge_baseline(sample_dataset(t, 2500, 16, 5), 2, 1e-6, sample_dataset(t, 2000, 16, 6));
  EXPECT_LT(mse, 0.1);
}

TEST(Preprocess, MultiIndexCounts) {
  EXPECT_EQ(hermite_multi_indices(5, 1).size(), 1u);
  EXPECT_EQ(hermite_multi_indices(5, 2).size(), 6u);
  EXPECT_EQ(hermite_multi_indices(5, 3).size(), 21u);
  EXPECT_EQ(hermite_multi_indices(5, 2).front().total_degree(), 0);
}

TEST(Preprocess, RemovesLinearCorrelation) {
  const int d = 64;
  const auto t = poly_target("z1", d);
  const Dataset ds = sample_dataset(t, d * d, d, 12);
  const auto res = preprocess_labels(ds, 2);
  const double raw = std::abs(ds.labels.dot(ds.inputs.col(0))) / ds.labels.size();
  const double adj = std::abs(res.labels.dot(ds.inputs.col(0))) / ds.labels.size();
  EXPECT_GE(raw / adj, 10.0);
}

TEST(Preprocess, DegreeOneOnlyCenters) {
  const auto t = poly_target("z1 + 3", 4);
  const Dataset ds = sample_dataset(t, 500, 4, 13);
  const auto res = preprocess_labels(ds, 1);
  ASSERT_EQ(res.table.terms.size(), 1u);
  EXPECT_NEAR(res.labels.mean(), 0.0, 1e-12);
  EXPECT_LE((res.labels - (ds.labels.array() - ds.labels.mean()).matrix()).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Preprocess, ReinjectionRestoresSubtractedPart) {
  const auto t = poly_target("z1 + z1*z2", 6);
  const Dataset ds = sample_dataset(t, 300, 6, 14);
  const auto res = preprocess_labels(ds, 2);
  const auto net = init_symmetric(8, 6, 15, SecondLayerInit::uniform);
  const Eigen::VectorXd a = ridge_second_layer(features(net, ds.inputs), res.labels, 1.0);
  const Eigen::VectorXd with = predict_with_reinjection(net, a, &res.table, ds.inputs);
  const Eigen::VectorXd plain = predict_with_reinjection(net, a, nullptr, ds.inputs);
  EXPECT_LE((with - plain - (ds.labels - res.labels)).cwiseAbs().maxCoeff(), 1e-10);
}
