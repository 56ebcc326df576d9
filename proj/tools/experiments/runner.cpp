#include "experiments/runner.hpp"

#include <chrono>
#include <cmath>
#include <optional>

#include "experiments/errors.hpp"
#include "experiments/thread_pool.hpp"
#include "giantstep/errors.hpp"
#include "giantstep/hermite.hpp"
#include "giantstep/hermite_tensor.hpp"
#include "giantstep/metrics.hpp"
#include "giantstep/pipeline.hpp"
#include "giantstep/preprocess.hpp"
#include "giantstep/ridge.hpp"
#include "giantstep/staircase.hpp"

namespace giantstep::experiments {

std::vector<std::string> indexed_columns(const std::string& prefix, int r) {
  std::vector<std::string> out;
  for (int k = 1; k <= r; ++k) out.push_back(prefix + std::to_string(k));
  return out;
}

namespace {

std::vector<std::string> concat(std::vector<std::string> a, const std::vector<std::string>& b) {
  a.insert(a.end(), b.begin(), b.end());
  return a;
}

using TableMap = std::map<std::string, Table>;

// Per-cell quantities shared by all seeds of the cell.
struct CellContext {
  const ExperimentConfig* config = nullptr;
  Cell cell;
  std::optional<MultiIndexTarget> target;
  std::optional<NormConstant> norm_oracle;
  Eigen::VectorXd pred_pos, pred_neg;
  double shift_ratio = 0.0;
  std::vector<int> oracle_dims;
};

int sign_of(double a) { return a >= 0 ? 1 : -1; }

TableMap run_single_step(const CellContext& ctx, std::uint64_t seed, CellOutput* dump) {
  const auto& cfg = *ctx.config;
  const MultiIndexTarget& target = *ctx.target;
  const int r = target.r();
  TrainConfig tc = cell_train_config(cfg, ctx.cell, seed);
  tc.T = 1;
  TwoLayerNet net = init_symmetric(tc.p, tc.d, seed, tc.second_layer_dist, tc.activation);
  const Eigen::VectorXd a0 = net.second_layer;
  const GDTrace trace = train_first_layer(net, target, tc);
  const auto rep = alignment_report(trace.snapshots[1], target);
  const Eigen::MatrixXd g = -trace.gradients[0];

  Table t(concat(concat({"seed", "step", "neuron", "a_sign"}, indexed_columns("cos_", r)),
                 concat({"ratio", "norm"}, indexed_columns("gcos_", r))));
  for (int i = 0; i < tc.p; ++i) {
    std::vector<std::string> row = {std::to_string(seed), "1", std::to_string(i),
                                    std::to_string(sign_of(a0(i)))};
    const auto& nr = rep.neurons[i];
    for (int k = 0; k < r; ++k) row.push_back(format_number(nr.cosine ? (*nr.cosine)(k) : 0.0));
    row.push_back(format_number(nr.ratio));
    row.push_back(format_number(nr.norm));
    const Eigen::VectorXd gi = g.row(i).transpose();
    const double gn = gi.norm();
    const Eigen::VectorXd gc = target.teacher() * gi;
    for (int k = 0; k < r; ++k) row.push_back(format_number(gn > 0 ? gc(k) / gn : 0.0));
    t.append(std::move(row));
  }
  if (dump)
    for (int s = 0; s < 2; ++s) dump->weights.push_back({seed, s, trace.snapshots[s]});
  return {{"alignment", std::move(t)}};
}

TableMap run_multi_step(const CellContext& ctx, std::uint64_t seed, CellOutput* dump) {
  const auto& cfg = *ctx.config;
  const MultiIndexTarget& target = *ctx.target;
  const int r = target.r();
  const TrainConfig tc = cell_train_config(cfg, ctx.cell, seed);
  TwoLayerNet net = init_symmetric(tc.p, tc.d, seed, tc.second_layer_dist, tc.activation);
  const GDTrace trace = train_first_layer(net, target, tc);
  Table trace_t(concat(concat({"seed", "step", "neuron"}, indexed_columns("cos_", r)), {"ratio", "norm"}));
  Table sub_t({"seed", "step", "learned_dim", "oracle_dim"});
  const ThresholdRule rule{cfg.threshold_c};
  for (int s = 0; s <= tc.T; ++s) {
    const auto rep = alignment_report(trace.snapshots[s], target);
    for (int i = 0; i < tc.p; ++i) {
      const auto& nr = rep.neurons[i];
      auto b = trace_t.add_row();
      b << static_cast<unsigned long>(seed) << s << i;
      for (int k = 0; k < r; ++k) b << (nr.cosine ? (*nr.cosine)(k) : 0.0);
      b << nr.ratio << nr.norm;
    }
    const int learned = recover_learned_subspace(trace.snapshots[s], target, rule).dim();
    const int oracle = ctx.oracle_dims[std::min<std::size_t>(s, ctx.oracle_dims.size() - 1)];
    sub_t.add_row() << static_cast<unsigned long>(seed) << s << learned << oracle;
    if (dump) dump->weights.push_back({seed, s, trace.snapshots[s]});
  }
  return {{"trace", std::move(trace_t)}, {"subspace", std::move(sub_t)}};
}

TableMap run_scaling(const CellContext& ctx, std::uint64_t seed) {
  const auto& cfg = *ctx.config;
  const MultiIndexTarget& target = *ctx.target;
  TrainConfig tc = cell_train_config(cfg, ctx.cell, seed);
  tc.T = 1;
  TwoLayerNet net = init_symmetric(tc.p, tc.d, seed, tc.second_layer_dist, tc.activation);
  const Eigen::VectorXd a0 = net.second_layer;
  const GDTrace trace = train_first_layer(net, target, tc);
  Table t({"d", "p", "n", "seed", "statistic", "value"});
  auto emit = [&](const std::string& name, double v) {
    t.add_row() << tc.d << tc.p << tc.n << static_cast<unsigned long>(seed) << name << v;
  };
  std::optional<SpikeBulk> sb;
  auto spike_bulk_at_init = [&]() -> const SpikeBulk& {
    if (!sb) {
      const Dataset batch = sample_dataset(target, tc.n, tc.d, trace.batch_seeds[0]);
      const double mu1 = hermite_coeffs(tc.activation, 1)[1];
      sb = spike_bulk(-trace.gradients[0], a0, batch, mu1);
    }
    return *sb;
  };
  for (const auto& stat : cfg.statistics) {
    if (stat == "alignment_ratio") {
      const Eigen::VectorXd ratios = alignment_report(trace.snapshots[1], target).ratios();
      emit(stat, median(std::vector<double>(ratios.data(), ratios.data() + ratios.size())));
    } else if (stat == "norm_deviation") {
      emit(stat, norm_concentration_check(trace, tc, a0, *ctx.norm_oracle).median_relative_deviation);
    } else if (stat == "delta_op") {
      const Eigen::MatrixXd& D = spike_bulk_at_init().delta;
      const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(D * D.transpose(), Eigen::EigenvaluesOnly);
      emit(stat, std::sqrt(tc.p * std::max(eig.eigenvalues().maxCoeff(), 0.0)));
    } else if (stat == "delta_teacher") {
      const Eigen::MatrixXd proj = spike_bulk_at_init().delta * target.teacher().transpose();
      emit(stat, tc.p * proj.cwiseAbs().maxCoeff());
    }
  }
  return {{"scaling", std::move(t)}};
}

double kernel_error(const MultiIndexTarget& target, const TrainConfig& tc, int degree, int n_test,
                    bool normalize) {
  const Dataset train = sample_dataset(target, tc.n, tc.d, derive_seed(tc.seed, Stream::ridge_batch, 0));
  const Dataset test = sample_dataset(target, n_test, tc.d, derive_seed(tc.seed, Stream::test));
  const double mse = kernel_ridge_baseline(train, degree, tc.lambda, test);
  return normalize ? mse / target.variance() : mse;
}

TableMap run_generalization(const CellContext& ctx, std::uint64_t seed) {
  const auto& cfg = *ctx.config;
  const MultiIndexTarget& target = *ctx.target;
  const TrainConfig base = cell_train_config(cfg, ctx.cell, seed);
  Table t({"d", "p", "n", "seed", "method", "T", "mse", "std_error", "learned_dim"});
  const ThresholdRule rule{cfg.threshold_c};
  auto pipeline_row = [&](const std::string& method, int T) {
    TrainConfig tc = base;
    tc.T = T;
    tc.keep_snapshots = false;
    const PipelineResult res = run_pipeline(target, tc, cfg.n_test, cfg.normalize_error);
    const int learned = recover_learned_subspace(res.net.first_layer, target, rule).dim();
    t.add_row() << tc.d << tc.p << tc.n << static_cast<unsigned long>(seed) << method << T
                << res.test.mse << res.test.std_error << learned;
  };
  for (const auto& m : cfg.methods) {
    if (m == "gd") {
      for (int T : cfg.gd_steps) pipeline_row(m, T);
    } else if (m == "rf") {
      pipeline_row(m, 0);
    } else {
      const int degree = m == "kernel1" ? 1 : 2;
      t.add_row() << base.d << base.p << base.n << static_cast<unsigned long>(seed) << m << 0
                  << kernel_error(target, base, degree, cfg.n_test, cfg.normalize_error) << 0.0 << 0;
    }
  }
  return {{"generalization", std::move(t)}};
}

TableMap run_cget(const CellContext& ctx, std::uint64_t seed) {
  const auto& cfg = *ctx.config;
  const TrainConfig tc = cell_train_config(cfg, ctx.cell, seed);
  const auto res = compare_ck_cl(*ctx.target, tc, tc.lambda, {seed}, cfg.cget).front();
  Table t({"seed", "err_ck", "err_cl", "spike_cosine", "a_ck_norm", "a_ck_inf_scaled", "a_cl_norm",
           "a_cl_inf_scaled", "clipped_fraction"});
  t.add_row() << static_cast<unsigned long>(seed) << res.err_ck << res.err_cl << res.spike_cosine
              << res.a_ck_norm << res.a_ck_inf_scaled << res.a_cl_norm << res.a_cl_inf_scaled
              << res.clipped_fraction;
  return {{"cget", std::move(t)}};
}

double coefficient_norm(const Eigen::MatrixXd& Z, const Eigen::VectorXd& y, int k) {
  auto terms = hermite_multi_indices(static_cast<int>(Z.cols()), k);
  estimate_coefficients(Z, y, terms);
  double s = 0.0;
  for (const auto& t : terms) s += t.coefficient * t.coefficient;
  return std::sqrt(s);
}

TableMap run_preprocessing(const CellContext& ctx, std::uint64_t seed) {
  const auto& cfg = *ctx.config;
  const MultiIndexTarget& target = *ctx.target;
  const TrainConfig base = cell_train_config(cfg, ctx.cell, seed);
  const int k = cfg.preprocess_degree;

  Table coeff({"seed", "degree_bound", "raw_norm", "adjusted_norm"});
  const Dataset batch = sample_dataset(target, base.n, base.d, batch_seed(seed, 0));
  const auto pre = preprocess_labels(batch, k);
  coeff.add_row() << static_cast<unsigned long>(seed) << k << coefficient_norm(batch.inputs, batch.labels, k)
                  << coefficient_norm(batch.inputs, pre.labels, k);

  Table t({"seed", "method", "mse", "std_error"});
  for (const auto& m : cfg.methods) {
    if (m == "vanilla" || m == "preprocessed") {
      TrainConfig tc = base;
      tc.keep_snapshots = false;
      tc.preprocess_degree.reset();
      if (m == "preprocessed") {
        tc.preprocess_degree = k;
        if (cfg.preprocess_eta) tc.eta = *cfg.preprocess_eta;
      }
      const auto res = run_pipeline(target, tc, cfg.n_test, cfg.normalize_error);
      t.add_row() << static_cast<unsigned long>(seed) << m << res.test.mse << res.test.std_error;
    } else {
      const int degree = m == "kernel1" ? 1 : 2;
      t.add_row() << static_cast<unsigned long>(seed) << m
                  << kernel_error(target, base, degree, cfg.n_test, cfg.normalize_error) << 0.0;
    }
  }
  return {{"preprocessing", std::move(t)}, {"coefficients", std::move(coeff)}};
}

TableMap run_second_step(const CellContext& ctx, std::uint64_t seed) {
  const auto& cfg = *ctx.config;
  const MultiIndexTarget& target = *ctx.target;
  const int r = target.r();
  TrainConfig tc = cell_train_config(cfg, ctx.cell, seed);
  tc.T = std::max(tc.T, 2);
  TwoLayerNet net = init_symmetric(tc.p, tc.d, seed, tc.second_layer_dist, tc.activation);
  const Eigen::VectorXd a0 = net.second_layer;
  const GDTrace trace = train_first_layer(net, target, tc);
  const Eigen::MatrixXd proj = -trace.gradients[1] * target.teacher().transpose();  // p×r
  Table t(concat({"seed", "neuron", "a_sign", "cos_to_prediction"}, indexed_columns("dir_", r)));
  for (int i = 0; i < tc.p; ++i) {
    const int s = sign_of(a0(i));
    Eigen::VectorXd dir = s * proj.row(i).transpose();
    const double nrm = dir.norm();
    if (nrm > 0) dir /= nrm;
    const Eigen::VectorXd& pred = s > 0 ? ctx.pred_pos : ctx.pred_neg;
    auto b = t.add_row();
    b << static_cast<unsigned long>(seed) << i << s << dir.dot(pred);
    for (int k = 0; k < r; ++k) b << dir(k);
  }
  return {{"orientation", std::move(t)}};
}

TableMap run_task(const CellContext& ctx, std::uint64_t seed, CellOutput* dump) {
  switch (ctx.config->kind) {
    case Kind::single_step: return run_single_step(ctx, seed, dump);
    case Kind::multi_step: return run_multi_step(ctx, seed, dump);
    case Kind::scaling: return run_scaling(ctx, seed);
    case Kind::generalization_sweep: return run_generalization(ctx, seed);
    case Kind::cget: return run_cget(ctx, seed);
    case Kind::preprocessing: return run_preprocessing(ctx, seed);
    case Kind::second_step_orientation: return run_second_step(ctx, seed);
    case Kind::staircase: break;
  }
  throw std::logic_error("no per-seed task for this experiment kind");
}

void prepare_cell(CellContext& ctx) {
  const auto& cfg = *ctx.config;
  ctx.target = cfg.targets[ctx.cell.target].build(ctx.cell.d);
  const TrainConfig tc = cell_train_config(cfg, ctx.cell, cfg.seeds.front());
  if (cfg.kind == Kind::scaling) {
    for (const auto& s : cfg.statistics)
      if (s == "norm_deviation")
        ctx.norm_oracle = norm_constant_oracle(tc.activation, *ctx.target, tc.n, tc.d, cfg.norm_mc_samples,
                                               derive_seed(static_cast<std::uint64_t>(tc.d), Stream::monte_carlo));
  }
  if (cfg.kind == Kind::second_step_orientation) {
    const double eta_over_p = tc.eta.value(tc.p, tc.d, tc.n) / tc.p;
    const double n_over_d = static_cast<double>(tc.n) / tc.d;
    ctx.shift_ratio = second_step_shift_ratio(tc.activation, eta_over_p, n_over_d, *ctx.target);
    ctx.pred_pos = predicted_second_step_orientation(tc.activation, +1, ctx.shift_ratio, *ctx.target);
    ctx.pred_neg = predicted_second_step_orientation(tc.activation, -1, ctx.shift_ratio, *ctx.target);
  }
  if (cfg.kind == Kind::multi_step) {
    const Polynomial g = ctx.target->polynomial_approximation();
    for (const auto& U : staircase_sequence(g, std::max(tc.T, 1))) ctx.oracle_dims.push_back(U.dim());
  }
}

Table prediction_table(const CellContext& ctx) {
  const int r = ctx.target->r();
  Table t(concat({"a_sign", "shift_ratio"}, indexed_columns("pred_", r)));
  for (int s : {1, -1}) {
    const Eigen::VectorXd& p = s > 0 ? ctx.pred_pos : ctx.pred_neg;
    auto b = t.add_row();
    b << s << ctx.shift_ratio;
    for (int k = 0; k < r; ++k) b << p(k);
  }
  return t;
}

// First non-finite cell of any table, as "table.column".
std::optional<std::string> non_finite(const TableMap& tables) {
  for (const auto& [name, t] : tables)
    for (std::size_t i = 0; i < t.rows(); ++i)
      for (std::size_t j = 0; j < t.columns().size(); ++j) {
        const auto& c = t.row(i)[j];
        if (c == "nan" || c == "-nan" || c == "inf" || c == "-inf") return name + "." + t.columns()[j];
      }
  return std::nullopt;
}

std::string task_name(const Cell& cell, std::uint64_t seed) {
  return cell.name + " seed " + std::to_string(seed);
}

}  // namespace

nlohmann::json staircase_report(const Polynomial& g, int t_max) {
  nlohmann::json out;
  out["r"] = g.num_vars();
  out["t_max"] = t_max;
  out["leap_index"] = leap_index(g);
  out["staircase_learnable"] = is_staircase_learnable(g, t_max);
  out["relevant_dim"] = relevant_subspace(g).dim();
  auto seq = nlohmann::json::array();
  const auto subspaces = staircase_sequence(g, t_max);
  for (std::size_t t = 0; t < subspaces.size(); ++t) {
    const Eigen::MatrixXd& B = subspaces[t].basis();
    auto basis = nlohmann::json::array();
    for (Eigen::Index j = 0; j < B.cols(); ++j) {
      std::vector<double> col(B.rows());
      for (Eigen::Index i = 0; i < B.rows(); ++i) col[i] = B(i, j);
      basis.push_back(col);
    }
    seq.push_back({{"t", t}, {"dim", B.cols()}, {"basis", basis}});
  }
  out["sequence"] = seq;
  return out;
}

RunResult run_experiment(const ExperimentConfig& config, int threads) {
  const auto start = std::chrono::steady_clock::now();
  RunResult result;
  result.config = config;
  result.threads = threads;

  if (config.kind == Kind::staircase) {
    auto list = nlohmann::json::array();
    for (const auto& spec : config.targets) {
      const Polynomial g = Polynomial::parse(*spec.polynomial);
      nlohmann::json entry = {{"target", *spec.polynomial}};
      entry.update(staircase_report(g, config.staircase_t_max));
      list.push_back(entry);
    }
    result.staircase = {{"targets", list}};
    result.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return result;
  }

  const auto cells = expand_cells(config);
  std::vector<CellContext> contexts(cells.size());
  for (std::size_t c = 0; c < cells.size(); ++c) {
    contexts[c].config = &config;
    contexts[c].cell = cells[c];
  }
  auto guarded = [&](const std::string& where, auto&& fn) {
    try {
      fn();
    } catch (const NumericalError& e) {
      throw CellFailure(where, e.what());
    } catch (const std::domain_error& e) {
      throw CellFailure(where, e.what());
    }
  };
  parallel_for(cells.size(), threads, [&](std::size_t c) {
    guarded(cells[c].name, [&] { prepare_cell(contexts[c]); });
  });

  const std::size_t S = config.seeds.size();
  std::vector<TableMap> task_tables(cells.size() * S);
  std::vector<CellOutput> dumps(cells.size() * S);
  parallel_for(task_tables.size(), threads, [&](std::size_t k) {
    const std::size_t c = k / S;
    const std::uint64_t seed = config.seeds[k % S];
    const std::string where = task_name(cells[c], seed);
    guarded(where, [&] {
      task_tables[k] = run_task(contexts[c], seed, config.dump_weights ? &dumps[k] : nullptr);
      if (auto bad = non_finite(task_tables[k])) throw NumericalError("non-finite value in " + *bad);
    });
  });

  for (std::size_t c = 0; c < cells.size(); ++c) {
    CellOutput out;
    out.cell = cells[c];
    for (std::size_t s = 0; s < S; ++s) {
      for (auto& [name, t] : task_tables[c * S + s]) {
        auto it = out.tables.find(name);
        if (it == out.tables.end()) out.tables.emplace(name, std::move(t));
        else it->second.append_rows(t);
      }
      for (auto& w : dumps[c * S + s].weights) out.weights.push_back(std::move(w));
    }
    if (config.kind == Kind::second_step_orientation) out.tables.emplace("prediction", prediction_table(contexts[c]));
    result.cells.push_back(std::move(out));
  }
  result.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return result;
}

}  // namespace giantstep::experiments
