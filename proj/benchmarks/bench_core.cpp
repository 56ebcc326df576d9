#include <benchmark/benchmark.h>

#include "giantstep/cget.hpp"
#include "giantstep/hermite_tensor.hpp"
#include "giantstep/network.hpp"
#include "giantstep/ridge.hpp"
#include "giantstep/staircase.hpp"

using namespace giantstep;

namespace {

MultiIndexTarget two_index(int d) {
  return MultiIndexTarget(MultiIndexTarget::aligned_teacher(2, d), Polynomial::parse("z1 + z1*z2"));
}

void BM_GradientMatrix(benchmark::State& state) {
  const int d = static_cast<int>(state.range(0));
  const int p = d, n = 4 * d;
  const auto target = two_index(d);
  const TwoLayerNet net = init_symmetric(p, d, 1, SecondLayerInit::uniform);
  const Dataset batch = sample_dataset(target, n, d, 2);
  for (auto _ : state) benchmark::DoNotOptimize(gradient_matrix(net, batch));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(n) * p * d);
}
BENCHMARK(BM_GradientMatrix)->Arg(64)->Arg(128)->Arg(256)->Arg(512)->Unit(benchmark::kMillisecond);

void BM_SampleDataset(benchmark::State& state) {
  const int d = static_cast<int>(state.range(0));
  const auto target = two_index(d);
  for (auto _ : state) benchmark::DoNotOptimize(sample_dataset(target, 4 * d, d, 3));
}
BENCHMARK(BM_SampleDataset)->Arg(128)->Arg(512)->Unit(benchmark::kMillisecond);

void BM_Ridge(benchmark::State& state) {
  const int p = static_cast<int>(state.range(0));
  const int n = 2 * p;
  const Eigen::MatrixXd X = gaussian_rows(n, p, 4, Stream::monte_carlo);
  const Eigen::VectorXd y = gaussian_rows(n, 1, 5, Stream::monte_carlo).col(0);
  for (auto _ : state) benchmark::DoNotOptimize(ridge_second_layer(X, y, 1e-3));
}
BENCHMARK(BM_Ridge)->Arg(128)->Arg(512)->Unit(benchmark::kMillisecond);

void BM_HermiteTensor(benchmark::State& state) {
  const Polynomial g = Polynomial::parse("z1/3 + 2*He2(z1)*z2 + z1*z3 + He4(z2) + z1*z2*z3");
  const int k = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(hermite_tensor(g, k));
}
BENCHMARK(BM_HermiteTensor)->DenseRange(1, 4);

void BM_StaircaseSequence(benchmark::State& state) {
  const Polynomial g = Polynomial::parse("z1/3 + 2*z1*z2/3 + z2*z3");
  for (auto _ : state) benchmark::DoNotOptimize(staircase_sequence(g, 8));
}
BENCHMARK(BM_StaircaseSequence);

void BM_ConditionalMoments(benchmark::State& state) {
  const int d = 64, p = 64;
  const TwoLayerNet net = init_symmetric(p, d, 1, SecondLayerInit::uniform);
  Eigen::VectorXd v = Eigen::VectorXd::Zero(d);
  v(0) = 1.0;
  const auto grid = uniform_grid(static_cast<int>(state.range(0)), 4.0);
  for (auto _ : state) benchmark::DoNotOptimize(conditional_moments(net, v, grid, 20 * p, 6));
}
BENCHMARK(BM_ConditionalMoments)->Arg(9)->Arg(33)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
