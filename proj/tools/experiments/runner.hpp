#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "experiments/config.hpp"
#include "experiments/table.hpp"
#include "giantstep/polynomial.hpp"

namespace giantstep::experiments {

struct WeightDump {
  std::uint64_t seed = 0;
  int step = 0;
  Eigen::MatrixXd W;
};

struct CellOutput {
  Cell cell;
  std::map<std::string, Table> tables;  // keyed by table name, e.g. "alignment"
  std::vector<WeightDump> weights;      // only with dump_weights
};

struct RunResult {
  ExperimentConfig config;
  std::vector<CellOutput> cells;
  nlohmann::json staircase;  // staircase experiments only
  double wall_seconds = 0.0;
  int threads = 1;
};

// Runs every (cell, seed) task on `threads` workers. Output does not depend
// on the thread count. Throws CellFailure for numerical failures.
RunResult run_experiment(const ExperimentConfig& config, int threads);

// U_0, U_1, ... with bases, leap index and learnability for one link.
nlohmann::json staircase_report(const Polynomial& g, int t_max);

// Column names shared by the writers and the criteria.
std::vector<std::string> indexed_columns(const std::string& prefix, int r);

}  // namespace giantstep::experiments
