#pragma once

#include <cstdint>
#include <random>

#include <Eigen/Dense>

namespace giantstep {

// Named substreams. Every random draw in the library goes through one of
// these so that runs are reproducible independently of scheduling.
enum class Stream : std::uint64_t {
  init = 1,
  batch = 2,
  test = 3,
  monte_carlo = 4,
  cl_noise = 5,
  teacher = 6,
  ridge_batch = 7,
};

// SplitMix64 finalizer, used only to derive seeds for std engines.
constexpr std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

constexpr std::uint64_t derive_seed(std::uint64_t seed, Stream stream,
                                    std::uint64_t index = 0) {
  return mix64(mix64(mix64(seed) ^ static_cast<std::uint64_t>(stream)) ^ index);
}

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}
  Rng(std::uint64_t seed, Stream stream, std::uint64_t index = 0)
      : engine_(derive_seed(seed, stream, index)) {}

  double normal() { return normal_(engine_); }
  double uniform(double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(engine_);
  }

  void fill_normal(Eigen::Ref<Eigen::MatrixXd> m) {
    // Row-major fill order so results do not depend on storage order.
    for (Eigen::Index i = 0; i < m.rows(); ++i)
      for (Eigen::Index j = 0; j < m.cols(); ++j) m(i, j) = normal();
  }

  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_;
};

// Standard Gaussian matrix whose rows are drawn in fixed-size blocks, each
// block from its own substream. Row i depends only on (seed, stream, i).
Eigen::MatrixXd gaussian_rows(Eigen::Index rows, Eigen::Index cols,
                              std::uint64_t seed, Stream stream,
                              std::uint64_t salt = 0);

}  // namespace giantstep
