#pragma once

#include <filesystem>
#include <string>

#include <nlohmann/json.hpp>

#include "experiments/runner.hpp"

namespace giantstep::experiments {

inline constexpr int kSchemaVersion = 1;

std::string git_hash();

// Writes <table>_<cell>.csv for every table of every cell, staircase.json
// for staircase runs, optional .npy weight dumps, and manifest.json.
// Returns the manifest path.
std::filesystem::path write_outputs(const RunResult& result);

// Rebuilds a RunResult from a manifest and the files it lists. Throws
// FileError for missing files and SchemaError for a bad manifest or CSV.
RunResult load_run(const std::filesystem::path& manifest_path);

// Little-endian float64 C-order array in the .npy v1.0 format.
void write_npy(const Eigen::MatrixXd& M, const std::filesystem::path& path);

}  // namespace giantstep::experiments
