#include "giantstep/rng.hpp"

namespace giantstep {

namespace {
constexpr Eigen::Index kRowBlock = 256;
}

Eigen::MatrixXd gaussian_rows(Eigen::Index rows, Eigen::Index cols,
                              std::uint64_t seed, Stream stream,
                              std::uint64_t salt) {
  Eigen::MatrixXd out(rows, cols);
  for (Eigen::Index start = 0; start < rows; start += kRowBlock) {
    Rng rng(derive_seed(seed, stream, salt), Stream::batch,
            static_cast<std::uint64_t>(start / kRowBlock));
    const Eigen::Index end = std::min(rows, start + kRowBlock);
    for (Eigen::Index i = start; i < end; ++i)
      for (Eigen::Index j = 0; j < cols; ++j) out(i, j) = rng.normal();
  }
  return out;
}

}  // namespace giantstep
