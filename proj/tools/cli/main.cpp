#include <filesystem>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "experiments/config.hpp"
#include "experiments/criteria.hpp"
#include "experiments/errors.hpp"
#include "experiments/manifest.hpp"
#include "experiments/runner.hpp"
#include "experiments/thread_pool.hpp"
#include "giantstep/polynomial.hpp"

namespace fs = std::filesystem;
using namespace giantstep::experiments;

namespace {

constexpr int kExitCriteriaFailed = 1;
constexpr int kExitInput = 2;
constexpr int kExitNumerical = 3;

int cmd_run(const std::string& config_path, const std::string& output_override) {
  ExperimentConfig cfg = load_config(config_path);
  if (!output_override.empty()) cfg.output_dir = output_override;
  std::error_code ec;
  fs::create_directories(cfg.output_dir, ec);
  if (ec) throw FileError("output_dir " + cfg.output_dir.string() + " is not writable: " + ec.message());
  const int threads = thread_count_from_env();
  std::cerr << "running " << to_string(cfg.kind) << " (" << cfg.seeds.size() << " seeds, " << threads
            << " threads)\n";
  const RunResult run = run_experiment(cfg, threads);
  const fs::path manifest = write_outputs(run);
  std::cout << manifest.string() << "\n";
  std::cerr << "done in " << run.wall_seconds << " s\n";
  return 0;
}

int cmd_verify(const std::string& manifest_path) {
  const RunResult run = load_run(manifest_path);
  const auto results = evaluate_criteria(run);
  if (results.empty()) {
    std::cout << "no criteria attached to experiment '" << to_string(run.config.kind) << "'\n";
    return 0;
  }
  bool ok = true;
  for (const auto& r : results) {
    std::cout << "criterion " << r.id << " (" << r.title << "): " << (r.passed ? "PASS" : "FAIL") << "  "
              << r.detail << "\n";
    ok = ok && r.passed;
  }
  return ok ? 0 : kExitCriteriaFailed;
}

int cmd_staircase(const std::string& spec, int t_max, const std::string& output) {
  giantstep::Polynomial g(0);
  try {
    g = giantstep::Polynomial::parse(spec);
  } catch (const std::invalid_argument& e) {
    throw InputError(std::string("--target: ") + e.what());
  }
  if (g.degree() < 1) throw InputError("--target: link must depend on at least one variable");
  nlohmann::json out = {{"target", spec}};
  out.update(staircase_report(g, t_max));
  if (output.empty()) {
    std::cout << out.dump(2) << "\n";
  } else {
    std::ofstream f(output);
    if (!f) throw FileError("cannot write " + output);
    f << out.dump(2) << "\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"giantstep: giant-step feature learning experiments"};
  app.require_subcommand(1);

  std::string config_path, output_override, manifest_path, target_spec, staircase_out;
  int t_max = 8;

  auto* run = app.add_subcommand("run", "Run the experiment described by a YAML config");
  run->add_option("config", config_path, "Config file")->required();
  run->add_option("-o,--output-dir", output_override, "Override output_dir");

  auto* verify = app.add_subcommand("verify", "Re-check a finished run against its criteria");
  verify->add_option("manifest", manifest_path, "manifest.json of the run")->required();

  auto* stair = app.add_subcommand("staircase", "Print the staircase subspace sequence of a link");
  stair->add_option("--target", target_spec, "Polynomial link, e.g. 'z1 + z2*z3'")->required();
  stair->add_option("--t-max", t_max, "Number of staircase steps")->check(CLI::PositiveNumber);
  stair->add_option("-o,--output", staircase_out, "Write JSON here instead of stdout");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitInput;
  }

  try {
    if (*run) return cmd_run(config_path, output_override);
    if (*verify) return cmd_verify(manifest_path);
    if (*stair) return cmd_staircase(target_spec, t_max, staircase_out);
  } catch (const CellFailure& e) {
    std::cerr << "error: numerical failure in " << e.what() << "\n";
    return kExitNumerical;
  } catch (const InputError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInput;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitCriteriaFailed;
  }
  return 0;
}
