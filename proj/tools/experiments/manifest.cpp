#include "experiments/manifest.hpp"

#include <chrono>
#include <ctime>
#include <fstream>

#include "experiments/errors.hpp"

#ifndef GIANTSTEP_GIT_HASH
#define GIANTSTEP_GIT_HASH "unknown"
#endif

namespace giantstep::experiments {

namespace fs = std::filesystem;

std::string git_hash() { return GIANTSTEP_GIT_HASH; }

namespace {

std::string utc_now() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FileError("cannot write " + path.string());
  out << text;
  if (!out) throw FileError("write failed: " + path.string());
}

nlohmann::json read_json(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FileError("missing file: " + path.string());
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw SchemaError(path.string() + ": " + e.what());
  }
}

}  // namespace

void write_npy(const Eigen::MatrixXd& M, const fs::path& path) {
  std::string header = "{'descr': '<f8', 'fortran_order': False, 'shape': (" + std::to_string(M.rows()) +
                       ", " + std::to_string(M.cols()) + "), }";
  const std::size_t total = 10 + header.size() + 1;
  header.append((64 - total % 64) % 64, ' ');
  header.push_back('\n');
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FileError("cannot write " + path.string());
  out.write("\x93NUMPY\x01\x00", 8);
  const auto len = static_cast<std::uint16_t>(header.size());
  const char lenb[2] = {static_cast<char>(len & 0xff), static_cast<char>(len >> 8)};
  out.write(lenb, 2);
  out << header;
  const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> rm = M;
  out.write(reinterpret_cast<const char*>(rm.data()), static_cast<std::streamsize>(rm.size() * sizeof(double)));
}

fs::path write_outputs(const RunResult& result) {
  const ExperimentConfig& cfg = result.config;
  const fs::path dir = cfg.output_dir;
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw FileError("cannot create output_dir " + dir.string() + ": " + ec.message());

  nlohmann::json manifest;
  manifest["schema_version"] = kSchemaVersion;
  manifest["tool"] = "giantstep";
  manifest["git_hash"] = git_hash();
  manifest["experiment"] = to_string(cfg.kind);
  manifest["config_source"] = cfg.source;
  manifest["config"] = cfg.text;
  manifest["created_utc"] = utc_now();
  manifest["wall_time_seconds"] = result.wall_seconds;
  manifest["threads"] = result.threads;
  manifest["seeds"] = cfg.seeds;

  auto cells = nlohmann::json::array();
  for (const auto& out : result.cells) {
    nlohmann::json c = {{"name", out.cell.name}, {"target", out.cell.target},
                        {"target_spec", cfg.targets[out.cell.target].describe()},
                        {"d", out.cell.d}, {"p", out.cell.p}, {"n", out.cell.n}};
    nlohmann::json files = nlohmann::json::object();
    for (const auto& [name, table] : out.tables) {
      const std::string file = name + "_" + out.cell.name + ".csv";
      write_csv(table, dir / file);
      files[name] = {{"path", file}, {"rows", table.rows()}, {"columns", table.columns()}};
    }
    auto weights = nlohmann::json::array();
    for (const auto& w : out.weights) {
      const std::string file = "weights_" + out.cell.name + "_seed" + std::to_string(w.seed) + "_step" +
                               std::to_string(w.step) + ".npy";
      write_npy(w.W, dir / file);
      weights.push_back(file);
    }
    c["files"] = files;
    if (!weights.empty()) c["weights"] = weights;
    cells.push_back(c);
  }
  manifest["cells"] = cells;
  if (cfg.kind == Kind::staircase) {
    write_text(dir / "staircase.json", result.staircase.dump(2) + "\n");
    manifest["staircase"] = "staircase.json";
  }
  const fs::path path = dir / "manifest.json";
  write_text(path, manifest.dump(2) + "\n");
  return path;
}

RunResult load_run(const fs::path& manifest_path) {
  const nlohmann::json m = read_json(manifest_path);
  const fs::path dir = manifest_path.parent_path();
  auto need = [&](const char* key) -> const nlohmann::json& {
    if (!m.contains(key)) throw SchemaError(manifest_path.string() + ": missing field '" + key + "'");
    return m.at(key);
  };
  if (need("schema_version") != kSchemaVersion)
    throw SchemaError(manifest_path.string() + ": unsupported schema_version " + m["schema_version"].dump());
  RunResult run;
  try {
    run.config = parse_config(need("config").get<std::string>(), manifest_path.string() + " (config echo)");
    run.wall_seconds = need("wall_time_seconds").get<double>();
    for (const auto& c : need("cells")) {
      CellOutput out;
      out.cell.name = c.at("name").get<std::string>();
      out.cell.target = c.at("target").get<int>();
      out.cell.d = c.at("d").get<int>();
      out.cell.p = c.at("p").get<int>();
      out.cell.n = c.at("n").get<int>();
      for (const auto& [name, f] : c.at("files").items())
        out.tables.emplace(name, read_csv(dir / f.at("path").get<std::string>(),
                                          f.at("columns").get<std::vector<std::string>>()));
      run.cells.push_back(std::move(out));
    }
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError(manifest_path.string() + ": " + e.what());
  }
  if (m.contains("staircase")) run.staircase = read_json(dir / m["staircase"].get<std::string>());
  return run;
}

}  // namespace giantstep::experiments
