#include "giantstep/pipeline.hpp"

#include "giantstep/ridge.hpp"

namespace giantstep {

PipelineResult run_pipeline(const MultiIndexTarget& target, const TrainConfig& config, int n_test,
                            bool normalize_error) {
  config.validate();
  PipelineResult res;
  res.net = init_symmetric(config.p, config.d, config.seed, config.second_layer_dist,
                           config.activation);
  res.trace = train_first_layer(res.net, target, config);

  Dataset rb = sample_dataset(target, config.n, config.d,
                              derive_seed(config.seed, Stream::ridge_batch, 0));
  if (config.preprocess_degree) {
    auto pre = preprocess_labels(rb, *config.preprocess_degree);
    rb.labels = std::move(pre.labels);
    res.table = std::move(pre.table);
  }
  res.a_hat = ridge_second_layer(features(res.net, rb.inputs), rb.labels, config.lambda);
  const PreprocessTable* table = res.table ? &*res.table : nullptr;
  res.test = generalization_error(
      [&](const Eigen::MatrixXd& Z) { return predict_with_reinjection(res.net, res.a_hat, table, Z); },
      target, n_test, derive_seed(config.seed, Stream::test), normalize_error);
  return res;
}

}  // namespace giantstep
