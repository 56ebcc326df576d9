#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "giantstep/cget.hpp"
#include "giantstep/network.hpp"
#include "giantstep/target.hpp"

namespace giantstep::experiments {

enum class Kind {
  single_step,
  multi_step,
  staircase,
  scaling,
  generalization_sweep,
  cget,
  preprocessing,
  second_step_orientation,
};

Kind parse_kind(const std::string& name);
std::string to_string(Kind kind);

// coeff * d^power, written "40", "4d", "16d^2" or "0.5d".
struct Scale {
  double coeff = 1.0;
  double power = 0.0;

  int resolve(int d) const;
  std::string describe() const;
  static Scale parse(const std::string& text);  // throws std::invalid_argument
};

struct TargetSpec {
  std::optional<std::string> polynomial;  // link in z1..zr
  std::vector<std::string> components;    // per-direction activations
  bool random_teacher = false;
  std::uint64_t teacher_seed = 0;

  int r() const;
  MultiIndexTarget build(int d) const;
  std::string describe() const;
};

struct ExperimentConfig {
  Kind kind = Kind::single_step;
  std::string source;  // file name used in diagnostics
  std::string text;    // the config as written, echoed into the manifest
  std::filesystem::path output_dir;
  std::vector<std::uint64_t> seeds;
  std::vector<TargetSpec> targets;

  TrainConfig train;  // d, p, n overwritten per cell
  std::vector<int> d_values;
  std::vector<Scale> n_values;
  std::vector<Scale> p_values;

  int n_test = 10000;
  bool normalize_error = false;
  double threshold_c = 1.0;
  bool dump_weights = false;

  int staircase_t_max = 8;
  std::vector<std::string> statistics;  // scaling
  int norm_mc_samples = 1000000;
  std::vector<std::string> methods;     // generalization-sweep / preprocessing
  std::vector<int> gd_steps;            // generalization-sweep
  CgetOptions cget;
  int preprocess_degree = 2;
  std::optional<LearningRate> preprocess_eta;
};

struct Cell {
  std::string name;
  int target = 0;
  int d = 0;
  int p = 0;
  int n = 0;
};

// Every combination of target x d x n x p, in that nesting order.
std::vector<Cell> expand_cells(const ExperimentConfig& config);
TrainConfig cell_train_config(const ExperimentConfig& config, const Cell& cell, std::uint64_t seed);

// Throws ConfigError with file, line and field.
ExperimentConfig parse_config(const std::string& text, const std::string& source = "<config>");
// Throws FileError when the file cannot be read.
ExperimentConfig load_config(const std::filesystem::path& path);

}  // namespace giantstep::experiments
