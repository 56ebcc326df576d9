#pragma once

#include <optional>

#include "giantstep/metrics.hpp"
#include "giantstep/network.hpp"
#include "giantstep/preprocess.hpp"

namespace giantstep {

struct PipelineResult {
  TwoLayerNet net;  // after training, second layer still a^0
  GDTrace trace;
  Eigen::VectorXd a_hat;  // ridge second layer
  std::optional<PreprocessTable> table;
  ErrorEstimate test;
};

// Init, T giant steps, ridge second layer on a fresh batch of n samples
// (labels preprocessed when configured), then test error with reinjection.
// T = 0 gives the random-features baseline.
PipelineResult run_pipeline(const MultiIndexTarget& target, const TrainConfig& config, int n_test,
                            bool normalize_error = false);

}  // namespace giantstep
