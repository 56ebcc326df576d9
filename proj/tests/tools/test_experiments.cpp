#include <filesystem>
#include <cstring>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>

#include "experiments/config.hpp"
#include "experiments/criteria.hpp"
#include "experiments/errors.hpp"
#include "experiments/manifest.hpp"
#include "experiments/runner.hpp"
#include "experiments/table.hpp"
#include "experiments/thread_pool.hpp"

using namespace giantstep;
using namespace giantstep::experiments;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("giantstep_tools_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

const char* kSmallSingleStep = R"(experiment: single-step
output_dir: OUT
seeds: [0, 1]
target:
  polynomial: "z1 + z2"
train:
  d: 16
  p: 8
  n: 4d
  activation: he1
)";

std::string with_output(std::string text, const fs::path& out) {
  text.replace(text.find("OUT"), 3, out.string());
  return text;
}

}  // namespace

TEST(Scale, ParsesPlainAndPowerForms) {
  EXPECT_EQ(Scale::parse("40").resolve(64), 40);
  EXPECT_EQ(Scale::parse("4d").resolve(64), 256);
  EXPECT_EQ(Scale::parse("16d^2").resolve(64), 65536);
  EXPECT_EQ(Scale::parse("d^2").resolve(64), 4096);
  EXPECT_EQ(Scale::parse("0.5d").resolve(64), 32);
  EXPECT_THROW(Scale::parse("4x"), std::invalid_argument);
  EXPECT_THROW(Scale::parse(""), std::invalid_argument);
}

TEST(Config, ParsesTrainAndSweep) {
  const auto cfg = parse_config(R"(experiment: scaling
seeds: [3, 4]
target: {components: [erf, erf]}
train: {p: 32, eta: {rule: per_width, param: 2}, second_layer: sign}
sweep: {d: [64, 128], n_over_d: [1, 4]}
scaling: {statistics: [delta_op]}
)");
  EXPECT_EQ(cfg.kind, Kind::scaling);
  EXPECT_EQ(cfg.seeds, (std::vector<std::uint64_t>{3, 4}));
  const auto cells = expand_cells(cfg);
  ASSERT_EQ(cells.size(), 4u);
  EXPECT_EQ(cells[0].name, "d64_p32_n64");
  EXPECT_EQ(cells[3].name, "d128_p32_n512");
  EXPECT_EQ(cfg.train.second_layer_dist, SecondLayerInit::sign);
  EXPECT_DOUBLE_EQ(cfg.train.eta.value(32, 64, 64), 64.0);
}

TEST(Config, EmptySeedsIsRejectedWithLine) {
  try {
    parse_config("experiment: single-step\ntarget: \"z1\"\nseeds: []\n", "x.yaml");
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_EQ(e.line(), 3);
    EXPECT_EQ(e.field(), "seeds");
  }
}

TEST(Config, ReportsFieldAndLine) {
  auto expect_field = [](const std::string& text, const std::string& field, int line) {
    try {
      parse_config(text, "c.yaml");
      ADD_FAILURE() << "no error for " << field;
    } catch (const ConfigError& e) {
      EXPECT_EQ(e.field(), field) << e.what();
      EXPECT_EQ(e.line(), line) << e.what();
    }
  };
  const std::string head = "experiment: single-step\nseeds: [0]\n";
  expect_field(head + "target: \"z1 +\"\n", "target", 3);
  expect_field(head + "target: \"z1\"\ntrain:\n  p: 7\n", "train.p", 5);
  expect_field(head + "target: \"z1\"\nsweep:\n  p: [8, 7]\n", "sweep.p", 5);
  expect_field(head + "target: \"z1\"\ntrain:\n  activation: swish\n", "train.activation", 5);
  expect_field(head + "target: \"z1\"\ntrain:\n  d: abc\n", "train.d", 5);
  expect_field(head + "target: \"z1\"\nbogus: 1\n", "bogus", 4);
  expect_field("experiment: nope\nseeds: [0]\ntarget: z1\n", "experiment", 1);
  expect_field(head + "target: {polynomial: z1, components: [relu]}\n", "target", 3);
}

TEST(Config, StaircaseNeedsPolynomials) {
  EXPECT_THROW(parse_config("experiment: staircase\nseeds: [0]\ntarget: {components: [relu]}\n"), ConfigError);
}

TEST(Table, CsvRoundTripIsExact) {
  const fs::path dir = scratch("csv");
  Table t({"a", "b", "name"});
  t.add_row() << 0.1 << -1e-300 << "x";
  t.add_row() << 1.0 / 3.0 << 7 << "y";
  write_csv(t, dir / "t.csv");
  const Table u = read_csv(dir / "t.csv", {"a", "name"});
  ASSERT_EQ(u.rows(), 2u);
  EXPECT_EQ(u.number(1, "a"), 1.0 / 3.0);
  EXPECT_EQ(u.number(0, "b"), -1e-300);
  EXPECT_EQ(u.text(1, "name"), "y");
  EXPECT_THROW(read_csv(dir / "t.csv", {"missing"}), SchemaError);
  EXPECT_THROW(read_csv(dir / "none.csv"), FileError);
  EXPECT_THROW(u.number(0, "name"), SchemaError);
}

TEST(ThreadPool, RunsEveryIndexAndRethrowsLowestFailure) {
  std::vector<int> hit(100, 0);
  parallel_for(hit.size(), 4, [&](std::size_t i) { hit[i] += 1; });
  for (int h : hit) EXPECT_EQ(h, 1);
  try {
    parallel_for(50, 3, [](std::size_t i) {
      if (i == 7 || i == 30) throw std::runtime_error(std::to_string(i));
    });
    FAIL();
  } catch (const std::runtime_error& e) {
    EXPECT_STREQ(e.what(), "7");
  }
}

TEST(ThreadPool, EnvironmentVariable) {
  ::setenv(kThreadsEnv, "3", 1);
  EXPECT_EQ(thread_count_from_env(), 3);
  ::setenv(kThreadsEnv, "zero", 1);
  EXPECT_THROW(thread_count_from_env(), InputError);
  ::unsetenv(kThreadsEnv);
  EXPECT_GE(thread_count_from_env(), 1);
}

TEST(Geometry, BisectrixDistance) {
  EXPECT_NEAR(bisectrix_distance_deg(1, 1), 0.0, 1e-12);
  EXPECT_NEAR(bisectrix_distance_deg(-2, -2), 0.0, 1e-12);
  EXPECT_NEAR(bisectrix_distance_deg(1, 0), 45.0, 1e-12);
  EXPECT_NEAR(bisectrix_distance_deg(1, -1), 90.0, 1e-12);
}

TEST(Geometry, AngularSpreadOfLines) {
  EXPECT_NEAR(angular_spread_deg({10, 20, 30}), 20.0, 1e-12);
  EXPECT_NEAR(angular_spread_deg({170, 190}), 20.0, 1e-12);  // 190 is the line at 10
  EXPECT_NEAR(angular_spread_deg({0, 90}), 90.0, 1e-12);
  EXPECT_NEAR(angular_spread_deg({0, 60, 120}), 120.0, 1e-12);
}

TEST(Run, OutputIsIndependentOfThreadCount) {
  const auto cfg = parse_config(with_output(kSmallSingleStep, scratch("unused")));
  const auto a = run_experiment(cfg, 1), b = run_experiment(cfg, 3);
  const Table& x = a.cells[0].tables.at("alignment");
  const Table& y = b.cells[0].tables.at("alignment");
  ASSERT_EQ(x.rows(), 16u);
  for (std::size_t i = 0; i < x.rows(); ++i) EXPECT_EQ(x.row(i), y.row(i));
}

TEST(Run, ManifestRoundTripAndVerify) {
  const fs::path dir = scratch("manifest");
  const auto cfg = parse_config(with_output(kSmallSingleStep, dir));
  const fs::path manifest = write_outputs(run_experiment(cfg, 1));
  std::ifstream in(manifest);
  const auto m = nlohmann::json::parse(in);
  EXPECT_EQ(m["schema_version"], kSchemaVersion);
  EXPECT_EQ(m["experiment"], "single-step");
  EXPECT_TRUE(m.contains("git_hash"));
  EXPECT_TRUE(m.contains("wall_time_seconds"));

  const RunResult back = load_run(manifest);
  const auto results = evaluate_criteria(back);
  ASSERT_EQ(results.size(), 1u);
  EXPECT_EQ(results[0].id, 1);
  EXPECT_TRUE(results[0].passed) << results[0].detail;

  // The echoed config reproduces the CSV byte for byte.
  const fs::path again = dir / "again";
  auto cfg2 = parse_config(m["config"].get<std::string>());
  cfg2.output_dir = again;
  write_outputs(run_experiment(cfg2, 2));
  for (const auto& f : fs::directory_iterator(dir)) {
    if (f.path().extension() != ".csv") continue;
    std::ifstream x(f.path()), y(again / f.path().filename());
    std::stringstream sx, sy;
    sx << x.rdbuf();
    sy << y.rdbuf();
    EXPECT_EQ(sx.str(), sy.str()) << f.path();
  }
}

TEST(Run, TamperedColumnFailsTheCriterion) {
  const fs::path dir = scratch("tamper");
  const fs::path manifest = write_outputs(run_experiment(parse_config(with_output(kSmallSingleStep, dir)), 1));
  const fs::path csv = dir / "alignment_d16_p8_n64.csv";
  Table t = read_csv(csv);
  Table bad(t.columns());
  for (std::size_t i = 0; i < t.rows(); ++i) {
    auto row = t.row(i);
    row[t.column_index("gcos_2")] = "0";
    bad.append(row);
  }
  write_csv(bad, csv);
  const auto results = evaluate_criteria(load_run(manifest));
  ASSERT_EQ(results.size(), 1u);
  EXPECT_FALSE(results[0].passed);

  fs::remove(csv);
  EXPECT_THROW(load_run(manifest), FileError);
}

TEST(Run, KindsWithoutCriteria) {
  const fs::path dir = scratch("multi");
  const auto cfg = parse_config("experiment: multi-step\noutput_dir: " + dir.string() +
                                "\nseeds: [0]\ntarget: \"z1 + z1*z2\"\ntrain: {d: 16, p: 8, n: 64, T: 2}\n");
  const RunResult run = run_experiment(cfg, 1);
  EXPECT_TRUE(evaluate_criteria(run).empty());
  const Table& sub = run.cells[0].tables.at("subspace");
  ASSERT_EQ(sub.rows(), 3u);
  EXPECT_EQ(sub.number(0, "oracle_dim"), 0);
  EXPECT_EQ(sub.number(1, "oracle_dim"), 1);
  EXPECT_EQ(sub.number(2, "oracle_dim"), 2);
}

TEST(Run, LeapTwoCgetTargetIsANumericalCellFailure) {
  const auto cfg = parse_config("experiment: cget\nseeds: [0]\ntarget: \"He2(z1)\"\ntrain: {d: 8, p: 4, n: 16}\n");
  try {
    run_experiment(cfg, 1);
    FAIL();
  } catch (const CellFailure& e) {
    EXPECT_EQ(e.cell(), "d8_p4_n16 seed 0");
  }
}

TEST(Npy, HeaderIsAlignedAndDataRowMajor) {
  const fs::path dir = scratch("npy");
  Eigen::MatrixXd M(2, 3);
  M << 1, 2, 3, 4, 5, 6;
  write_npy(M, dir / "m.npy");
  std::ifstream in(dir / "m.npy", std::ios::binary);
  std::string bytes((std::istreambuf_iterator<char>(in)), {});
  ASSERT_EQ(bytes.substr(0, 6), "\x93NUMPY");
  const std::size_t header_len = static_cast<unsigned char>(bytes[8]) | (static_cast<unsigned char>(bytes[9]) << 8);
  EXPECT_EQ((10 + header_len) % 64, 0u);
  EXPECT_NE(bytes.find("'shape': (2, 3)"), std::string::npos);
  double second;
  std::memcpy(&second, bytes.data() + 10 + header_len + 8, sizeof(double));
  EXPECT_EQ(second, 2.0);
}
