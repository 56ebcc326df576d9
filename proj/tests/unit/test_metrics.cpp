#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "giantstep/hermite.hpp"
#include "giantstep/metrics.hpp"

using namespace giantstep;

namespace {

MultiIndexTarget poly_target(const char* text, int d) {
  Polynomial g = Polynomial::parse(text);
  return MultiIndexTarget(MultiIndexTarget::aligned_teacher(g.num_vars(), d), g);
}

}  // namespace

TEST(Alignment, TeacherRowsAreFullyAligned) {
  const Eigen::MatrixXd Ws = MultiIndexTarget::random_teacher(2, 12, 3);
  const auto rep = alignment_report(Ws, Ws);
  ASSERT_EQ(rep.neurons.size(), 2u);
  for (int i = 0; i < 2; ++i) {
    EXPECT_NEAR(rep.neurons[i].ratio, 1.0, 1e-12);
    for (int k = 0; k < 2; ++k) EXPECT_NEAR((*rep.neurons[i].cosine)(k), i == k ? 1.0 : 0.0, 1e-12);
  }
}

TEST(Alignment, RandomRowsHaveSmallRatio) {
  const int d = 10000, r = 2;
  const auto net = init_symmetric(200, d, 5, SecondLayerInit::uniform);
  const auto rep = alignment_report(net.first_layer, MultiIndexTarget::aligned_teacher(r, d));
  const Eigen::VectorXd ratios = rep.ratios();
  const double med = median(std::vector<double>(ratios.data(), ratios.data() + ratios.size()));
  EXPECT_GT(med, 0.2 * r / d);
  EXPECT_LT(med, 5.0 * r / d);
}

TEST(Alignment, RowsInFirstDirectionAndZeroRows) {
  Eigen::MatrixXd W = Eigen::MatrixXd::Zero(3, 5);
  W(0, 0) = 2.0;
  W(1, 0) = -0.5;
  const auto rep = alignment_report(W, MultiIndexTarget::aligned_teacher(2, 5));
  EXPECT_EQ((*rep.neurons[0].cosine)(1), 0.0);
  EXPECT_EQ((*rep.neurons[1].cosine)(0), -1.0);
  EXPECT_FALSE(rep.neurons[2].cosine.has_value());
  EXPECT_EQ(rep.neurons[2].ratio, 0.0);
}

TEST(Alignment, InvariantUnderRowScaling) {
  const auto net = init_symmetric(6, 9, 1, SecondLayerInit::uniform);
  const Eigen::MatrixXd Ws = MultiIndexTarget::random_teacher(3, 9, 2);
  Eigen::MatrixXd scaled = net.first_layer;
  for (int i = 0; i < 6; ++i) scaled.row(i) *= 0.1 + i;
  const auto a = alignment_report(net.first_layer, Ws);
  const auto b = alignment_report(scaled, Ws);
  for (int i = 0; i < 6; ++i) {
    EXPECT_NEAR(a.neurons[i].ratio, b.neurons[i].ratio, 1e-12);
    EXPECT_LE((*a.neurons[i].cosine - *b.neurons[i].cosine).norm(), 1e-12);
    EXPECT_LE(a.neurons[i].ratio, 1.0);
  }
}

TEST(SpikeBulk, IdentityStudentHasNoBulk) {
  const int p = 10, d = 12;
  const auto net = init_symmetric(p, d, 3, SecondLayerInit::uniform, Activation::identity());
  const auto target = poly_target("z1 + z1*z2", d);
  const Dataset batch = sample_dataset(target, 80, d, 4);
  const Eigen::MatrixXd g = -gradient_matrix(net, batch);
  const SpikeBulk sb = spike_bulk(g, net.second_layer, batch, 1.0);
  EXPECT_LE(sb.delta.cwiseAbs().maxCoeff(), 1e-14);
}

TEST(SpikeBulk, ReconstructsGradient) {
  const int p = 16, d = 20;
  const auto net = init_symmetric(p, d, 3, SecondLayerInit::gaussian);
  const auto target = poly_target("z1 + z2^2", d);
  const Dataset batch = sample_dataset(target, 80, d, 4);
  const Eigen::MatrixXd g = -gradient_matrix(net, batch);
  const SpikeBulk sb = spike_bulk(g, net.second_layer, batch, 0.5);
  EXPECT_LE((sb.u * sb.v.transpose() + sb.delta - g).cwiseAbs().maxCoeff(), 1e-15);
  EXPECT_LE((sb.v - batch.inputs.transpose() * batch.labels / 80.0).norm(), 1e-14);
}

TEST(NormConcentration, ZeroRateIsExact) {
  const int p = 8, d = 16;
  auto net = init_symmetric(p, d, 1, SecondLayerInit::uniform);
  TrainConfig cfg;
  cfg.d = d;
  cfg.p = p;
  cfg.n = 64;
  cfg.eta = LearningRate::parse("fixed", 0.0);
  const auto target = poly_target("z1 + z2", d);
  const auto trace = train_first_layer(net, target, cfg);
  const NormConstant oracle = norm_constant_oracle(net.activation, target, cfg.n, d, 1000, 2);
  const auto rep = norm_concentration_check(trace, cfg, net.second_layer, oracle);
  for (int i = 0; i < p; ++i) {
    EXPECT_DOUBLE_EQ(rep.predicted(i), 1.0);
    EXPECT_NEAR(rep.measured(i), 1.0, 1e-14);
  }
}

TEST(NormConcentration, OracleMatchesDirectEstimate) {
  // Direct MC of E||g_i||^2 for a single neuron orthogonal to V* against the
  // reduced-coordinate oracle.
  const int d = 24, n = 96, p = 2;
  const auto target = poly_target("z1 + z1^2", d);
  const NormConstant oracle = norm_constant_oracle(Activation::relu(), target, n, d, 400000, 7);
  TwoLayerNet net;
  net.first_layer = Eigen::MatrixXd::Zero(p, d);
  net.first_layer(0, d - 1) = 1.0;
  net.first_layer(1, d - 1) = 1.0;
  net.second_layer = Eigen::Vector2d(1 / std::sqrt(2.0), -1 / std::sqrt(2.0));
  double acc = 0.0;
  const int reps = 3000;
  for (int s = 0; s < reps; ++s) {
    const Dataset b = sample_dataset(target, n, d, 1000 + s);
    acc += gradient_matrix(net, b).row(0).squaredNorm();
  }
  const double direct = acc / reps;
  const double predicted = 0.5 / p * oracle.K;
  EXPECT_NEAR(direct / predicted, 1.0, 0.05);
}

TEST(SecondStep, WorkedCaseOrientation) {
  const auto target = poly_target("z1 - z1^2 + z2 + z2^2", 8);
  const double c = 2.0 / std::sqrt(3.0 * std::numbers::pi);
  const Eigen::Vector2d plus = Eigen::Vector2d(1 - c, 1 + c).normalized();
  const Eigen::VectorXd got_plus = predicted_second_step_orientation(Activation::relu(), +1, 2.0, 4.0, target);
  const Eigen::VectorXd got_minus = predicted_second_step_orientation(Activation::relu(), -1, 2.0, 4.0, target);
  EXPECT_LE((got_plus - plus).norm(), 1e-6);
  EXPECT_NEAR(got_plus(0), got_minus(1), 1e-12);
  EXPECT_NEAR(got_plus(1), got_minus(0), 1e-12);
  EXPECT_NEAR(got_plus.norm(), 1.0, 1e-12);
  EXPECT_NEAR(second_step_shift_ratio(Activation::relu(), 2.0, 4.0, target), 1 / std::sqrt(2.0), 1e-9);
}

TEST(SecondStep, WorkedCaseDecimals) {
  // 2 / sqrt(3 pi) = 0.651470...
  const double c = 2.0 / std::sqrt(3.0 * std::numbers::pi);
  EXPECT_NEAR(1 - c, 0.34853, 1e-5);
  EXPECT_NEAR(1 + c, 1.65147, 1e-5);
}

TEST(SecondStep, MatchingQuadraticsStayOnDiagonal) {
  const auto target = poly_target("z1 + z2 + z1^2 + z2^2", 8);
  for (int s : {+1, -1}) {
    const Eigen::VectorXd v = predicted_second_step_orientation(Activation::relu(), s, 2.0, 4.0, target);
    EXPECT_NEAR(std::abs(v(0)), 1 / std::sqrt(2.0), 1e-9);
    EXPECT_NEAR(v(0), v(1), 1e-9);
  }
}

TEST(SecondStep, UnsupportedCombinationsThrow) {
  const auto target = poly_target("z1 - z1^2 + z2 + z2^2", 8);
  EXPECT_THROW(predicted_second_step_orientation(Activation::tanh(), 1, 2.0, 4.0, target), std::domain_error);
  EXPECT_THROW(predicted_second_step_orientation(Activation::relu(), 1, 2.0, 4.0, poly_target("He2(z1) + He2(z2)", 8)),
               std::domain_error);
}

TEST(Subspace, RecoveredEmptyAtInit) {
  const int d = 512;
  const auto net = init_symmetric(64, d, 9, SecondLayerInit::uniform);
  EXPECT_EQ(recover_learned_subspace(net.first_layer, poly_target("z1 + z2", d)).dim(), 0);
}

TEST(Subspace, OneStepOnLinearTargetFindsFirstDirection) {
  const int d = 256;
  TrainConfig cfg;
  cfg.d = d;
  cfg.p = 64;
  cfg.n = 4 * d;
  cfg.eta = LearningRate::parse("per_width", 1.0);
  auto net = init_symmetric(cfg.p, d, 4, SecondLayerInit::sign);
  const auto target = poly_target("z1", d);
  train_first_layer(net, target, cfg);
  const Subspace U = recover_learned_subspace(net.first_layer, target);
  ASSERT_EQ(U.dim(), 1);
  EXPECT_NEAR(std::abs(U.basis()(0, 0)), 1.0, 1e-12);
}

TEST(Subspace, ThresholdRule) {
  EXPECT_NEAR(ThresholdRule{}.tau(100), std::log(100.0) / 10.0, 1e-15);
  EXPECT_NEAR(ThresholdRule{4.0}.tau(100), 4 * std::log(100.0) / 10.0, 1e-15);
}

TEST(GeneralizationError, Examples) {
  const auto t = poly_target("z1", 6);
  const auto zero = generalization_error([](const Eigen::MatrixXd& Z) { return Eigen::VectorXd::Zero(Z.rows()); }, t,
                                         20000, 1);
  EXPECT_NEAR(zero.mse, 1.0, 4 * zero.std_error);
  const auto exact = generalization_error([&](const Eigen::MatrixXd& Z) { return t.evaluate(Z); }, t, 20000, 1);
  EXPECT_EQ(exact.mse, 0.0);
  const auto t2 = poly_target("z1 + z1*z2", 6);
  const auto lin = generalization_error([](const Eigen::MatrixXd& Z) { return Eigen::VectorXd(Z.col(0)); }, t2,
                                        40000, 2);
  EXPECT_NEAR(lin.mse, 1.0, 4 * lin.std_error);
  const auto norm = generalization_error([](const Eigen::MatrixXd& Z) { return Eigen::VectorXd::Zero(Z.rows()); }, t2,
                                         20000, 3, true);
  EXPECT_NEAR(norm.mse, 1.0, 4 * norm.std_error);
}

TEST(Statistics, MedianAndSlope) {
  EXPECT_EQ(median({3.0, 1.0, 2.0}), 2.0);
  EXPECT_EQ(median({4.0, 1.0, 2.0, 3.0}), 2.5);
  std::vector<double> x{64, 128, 256, 512}, y;
  for (double v : x) y.push_back(3.0 / std::sqrt(v));
  EXPECT_NEAR(loglog_slope(x, y), -0.5, 1e-12);
}
