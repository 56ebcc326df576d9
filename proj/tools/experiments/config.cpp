#include "experiments/config.hpp"

#include <cmath>
#include <fstream>
#include <regex>
#include <set>
#include <sstream>

#include <yaml-cpp/yaml.h>

#include "experiments/errors.hpp"
#include "giantstep/polynomial.hpp"

namespace giantstep::experiments {

ConfigError::ConfigError(std::string file, int line, std::string field, const std::string& message)
    : InputError(file + (line > 0 ? ":" + std::to_string(line) : "") +
                 (field.empty() ? "" : ": " + field) + ": " + message),
      file_(std::move(file)),
      line_(line),
      field_(std::move(field)) {}

namespace {

const std::vector<std::pair<Kind, std::string>> kKindNames = {
    {Kind::single_step, "single-step"},
    {Kind::multi_step, "multi-step"},
    {Kind::staircase, "staircase"},
    {Kind::scaling, "scaling"},
    {Kind::generalization_sweep, "generalization-sweep"},
    {Kind::cget, "cget"},
    {Kind::preprocessing, "preprocessing"},
    {Kind::second_step_orientation, "second-step-orientation"},
};

const std::set<std::string> kStatistics = {"alignment_ratio", "norm_deviation", "delta_op",
                                           "delta_teacher"};
const std::set<std::string> kGeneralizationMethods = {"gd", "rf", "kernel1", "kernel2"};
const std::set<std::string> kPreprocessMethods = {"vanilla", "preprocessed", "kernel1", "kernel2"};

class Parser {
 public:
  explicit Parser(std::string source) : source_(std::move(source)) {}

  [[noreturn]] void fail(const YAML::Node& node, const std::string& field,
                         const std::string& message) const {
    const int line = node.IsDefined() && node.Mark().line >= 0 ? node.Mark().line + 1 : 0;
    throw ConfigError(source_, line, field, message);
  }

  void check_keys(const YAML::Node& map, const std::string& prefix,
                  const std::set<std::string>& allowed) const {
    if (!map.IsMap()) fail(map, prefix, "expected a mapping");
    for (const auto& kv : map) {
      const auto key = kv.first.as<std::string>();
      if (!allowed.count(key)) fail(kv.first, join(prefix, key), "unknown field");
    }
  }

  static std::string join(const std::string& prefix, const std::string& key) {
    return prefix.empty() ? key : prefix + "." + key;
  }

  template <class T>
  T scalar(const YAML::Node& node, const std::string& field, const char* expected) const {
    if (!node.IsScalar()) fail(node, field, std::string("expected ") + expected);
    try {
      return node.as<T>();
    } catch (const YAML::Exception&) {
      fail(node, field, std::string("expected ") + expected + ", got '" + node.Scalar() + "'");
    }
  }

  int integer(const YAML::Node& n, const std::string& f) const { return scalar<int>(n, f, "an integer"); }
  double real(const YAML::Node& n, const std::string& f) const { return scalar<double>(n, f, "a number"); }
  bool boolean(const YAML::Node& n, const std::string& f) const { return scalar<bool>(n, f, "true or false"); }
  std::string text(const YAML::Node& n, const std::string& f) const {
    return scalar<std::string>(n, f, "a string");
  }

  int positive(const YAML::Node& n, const std::string& f) const {
    const int v = integer(n, f);
    if (v < 1) fail(n, f, "must be >= 1");
    return v;
  }

  template <class F>
  auto list(const YAML::Node& node, const std::string& field, F&& item) const {
    using T = decltype(item(node, field));
    std::vector<T> out;
    if (node.IsScalar()) {
      out.push_back(item(node, field));
      return out;
    }
    if (!node.IsSequence()) fail(node, field, "expected a list");
    for (std::size_t i = 0; i < node.size(); ++i)
      out.push_back(item(node[i], field + "[" + std::to_string(i) + "]"));
    return out;
  }

  Scale scale(const YAML::Node& node, const std::string& field) const {
    if (!node.IsScalar()) fail(node, field, "expected an integer or a form like 4d, 16d^2");
    try {
      return Scale::parse(node.Scalar());
    } catch (const std::invalid_argument& e) {
      fail(node, field, e.what());
    }
  }

  LearningRate eta(const YAML::Node& node, const std::string& field) const {
    if (node.IsScalar()) {
      LearningRate lr;
      lr.rule = LearningRate::Rule::fixed;
      lr.param = real(node, field);
      return lr;
    }
    check_keys(node, field, {"rule", "param"});
    if (!node["rule"]) fail(node, field + ".rule", "missing");
    const double param = node["param"] ? real(node["param"], field + ".param") : 1.0;
    try {
      return LearningRate::parse(text(node["rule"], field + ".rule"), param);
    } catch (const std::invalid_argument& e) {
      fail(node["rule"], field + ".rule", e.what());
    }
  }

  TargetSpec target(const YAML::Node& node, const std::string& field) const {
    TargetSpec t;
    if (node.IsScalar()) {
      t.polynomial = node.Scalar();
    } else {
      check_keys(node, field, {"polynomial", "components", "teacher", "teacher_seed"});
      if (node["polynomial"]) t.polynomial = text(node["polynomial"], field + ".polynomial");
      if (node["components"])
        t.components = list(node["components"], field + ".components",
                            [&](const YAML::Node& n, const std::string& f) { return text(n, f); });
      if (t.polynomial.has_value() == !t.components.empty())
        fail(node, field, "give exactly one of 'polynomial' or 'components'");
      if (node["teacher"]) {
        const auto kind = text(node["teacher"], field + ".teacher");
        if (kind != "aligned" && kind != "random")
          fail(node["teacher"], field + ".teacher", "expected aligned or random");
        t.random_teacher = kind == "random";
      }
      if (node["teacher_seed"])
        t.teacher_seed = scalar<std::uint64_t>(node["teacher_seed"], field + ".teacher_seed",
                                               "a non-negative integer");
    }
    const YAML::Node& where = node.IsMap() && node["polynomial"] ? node["polynomial"] : node;
    try {
      if (t.polynomial) {
        const auto g = Polynomial::parse(*t.polynomial);
        if (g.num_vars() < 1) throw std::invalid_argument("link has no variables");
        if (g.degree() < 1) throw std::invalid_argument("link is constant");
      }
      for (const auto& c : t.components) (void)Activation::parse(c);
    } catch (const std::exception& e) {
      fail(where, field, e.what());
    }
    return t;
  }

  ExperimentConfig parse(const std::string& text_in) {
    ExperimentConfig cfg;
    cfg.source = source_;
    cfg.text = text_in;
    YAML::Node root;
    try {
      root = YAML::Load(text_in);
    } catch (const YAML::ParserException& e) {
      throw ConfigError(source_, e.mark.line + 1, "", e.msg);
    }
    if (!root.IsMap()) throw ConfigError(source_, 0, "", "expected a mapping at top level");
    check_keys(root, "",
               {"experiment", "output_dir", "seeds", "target", "targets", "train", "sweep", "n_test",
                "normalize_error", "threshold_c", "dump_weights", "staircase", "scaling",
                "generalization", "cget", "preprocess"});

    if (!root["experiment"]) fail(root, "experiment", "missing");
    try {
      cfg.kind = parse_kind(text(root["experiment"], "experiment"));
    } catch (const std::invalid_argument& e) {
      fail(root["experiment"], "experiment", e.what());
    }

    cfg.output_dir = root["output_dir"] ? text(root["output_dir"], "output_dir")
                                        : "runs/" + to_string(cfg.kind);

    if (!root["seeds"]) fail(root, "seeds", "missing");
    cfg.seeds = list(root["seeds"], "seeds", [&](const YAML::Node& n, const std::string& f) {
      return scalar<std::uint64_t>(n, f, "a non-negative integer");
    });
    if (cfg.seeds.empty()) fail(root["seeds"], "seeds", "must not be empty");

    if (root["target"] && root["targets"]) fail(root["targets"], "targets", "give target or targets, not both");
    if (root["target"]) cfg.targets.push_back(target(root["target"], "target"));
    if (root["targets"]) {
      if (!root["targets"].IsSequence() || root["targets"].size() == 0)
        fail(root["targets"], "targets", "expected a nonempty list");
      for (std::size_t i = 0; i < root["targets"].size(); ++i)
        cfg.targets.push_back(target(root["targets"][i], "targets[" + std::to_string(i) + "]"));
    }
    if (cfg.targets.empty()) fail(root, "target", "missing");

    parse_train(root, cfg);
    parse_sections(root, cfg);
    validate(root, cfg);
    return cfg;
  }

  void parse_train(const YAML::Node& root, ExperimentConfig& cfg) const {
    TrainConfig& tc = cfg.train;
    tc.n = 0;
    cfg.d_values = {tc.d};
    cfg.n_values = {Scale{4.0, 1.0}};
    cfg.p_values = {Scale{static_cast<double>(tc.p), 0.0}};
    if (const auto train = root["train"]) {
      check_keys(train, "train",
                 {"d", "p", "n", "T", "eta", "lambda", "activation", "second_layer",
                  "preprocess_degree", "retrain_second_layer"});
      if (train["d"]) cfg.d_values = {positive(train["d"], "train.d")};
      if (train["p"]) cfg.p_values = {scale(train["p"], "train.p")};
      if (train["n"]) cfg.n_values = {scale(train["n"], "train.n")};
      if (train["T"]) {
        tc.T = integer(train["T"], "train.T");
        if (tc.T < 0) fail(train["T"], "train.T", "must be >= 0");
      }
      if (train["eta"]) tc.eta = eta(train["eta"], "train.eta");
      if (train["lambda"]) {
        tc.lambda = real(train["lambda"], "train.lambda");
        if (!(tc.lambda > 0.0)) fail(train["lambda"], "train.lambda", "must be > 0");
      }
      if (train["activation"]) {
        try {
          tc.activation = Activation::parse(text(train["activation"], "train.activation"));
        } catch (const std::invalid_argument& e) {
          fail(train["activation"], "train.activation", e.what());
        }
      }
      if (train["second_layer"]) {
        try {
          tc.second_layer_dist =
              parse_second_layer_init(text(train["second_layer"], "train.second_layer"));
        } catch (const std::invalid_argument& e) {
          fail(train["second_layer"], "train.second_layer", e.what());
        }
      }
      if (train["preprocess_degree"])
        tc.preprocess_degree = positive(train["preprocess_degree"], "train.preprocess_degree");
      if (train["retrain_second_layer"])
        tc.retrain_second_layer = boolean(train["retrain_second_layer"], "train.retrain_second_layer");
    }
    if (const auto sweep = root["sweep"]) {
      check_keys(sweep, "sweep", {"d", "n", "n_over_d", "p"});
      if (sweep["n"] && sweep["n_over_d"]) fail(sweep["n"], "sweep.n", "give n or n_over_d, not both");
      if (sweep["d"])
        cfg.d_values = list(sweep["d"], "sweep.d",
                            [&](const YAML::Node& n, const std::string& f) { return positive(n, f); });
      if (sweep["n"])
        cfg.n_values = list(sweep["n"], "sweep.n",
                            [&](const YAML::Node& n, const std::string& f) { return scale(n, f); });
      if (sweep["n_over_d"])
        cfg.n_values = list(sweep["n_over_d"], "sweep.n_over_d",
                            [&](const YAML::Node& n, const std::string& f) {
                              const double r = real(n, f);
                              if (!(r > 0)) fail(n, f, "must be > 0");
                              return Scale{r, 1.0};
                            });
      if (sweep["p"])
        cfg.p_values = list(sweep["p"], "sweep.p",
                            [&](const YAML::Node& n, const std::string& f) { return scale(n, f); });
    }
  }

  void parse_sections(const YAML::Node& root, ExperimentConfig& cfg) const {
    if (root["n_test"]) cfg.n_test = positive(root["n_test"], "n_test");
    if (root["normalize_error"]) cfg.normalize_error = boolean(root["normalize_error"], "normalize_error");
    if (root["threshold_c"]) {
      cfg.threshold_c = real(root["threshold_c"], "threshold_c");
      if (!(cfg.threshold_c > 0)) fail(root["threshold_c"], "threshold_c", "must be > 0");
    }
    if (root["dump_weights"]) cfg.dump_weights = boolean(root["dump_weights"], "dump_weights");

    if (const auto s = root["staircase"]) {
      check_keys(s, "staircase", {"t_max"});
      if (s["t_max"]) cfg.staircase_t_max = positive(s["t_max"], "staircase.t_max");
    }
    cfg.statistics = {"alignment_ratio"};
    if (const auto s = root["scaling"]) {
      check_keys(s, "scaling", {"statistics", "norm_mc_samples"});
      if (s["statistics"])
        cfg.statistics = names(s["statistics"], "scaling.statistics", kStatistics);
      if (s["norm_mc_samples"])
        cfg.norm_mc_samples = positive(s["norm_mc_samples"], "scaling.norm_mc_samples");
    }
    cfg.methods = cfg.kind == Kind::preprocessing ? std::vector<std::string>{"vanilla", "preprocessed"}
                                                  : std::vector<std::string>{"gd", "rf"};
    if (const auto s = root["generalization"]) {
      check_keys(s, "generalization", {"methods", "gd_steps"});
      if (s["methods"]) cfg.methods = names(s["methods"], "generalization.methods", kGeneralizationMethods);
      if (s["gd_steps"])
        cfg.gd_steps = list(s["gd_steps"], "generalization.gd_steps",
                            [&](const YAML::Node& n, const std::string& f) { return positive(n, f); });
    }
    if (cfg.gd_steps.empty()) cfg.gd_steps = {std::max(cfg.train.T, 1)};
    if (const auto s = root["cget"]) {
      check_keys(s, "cget", {"knots", "half_width", "mc_per_width"});
      if (s["knots"]) cfg.cget.knots = positive(s["knots"], "cget.knots");
      if (cfg.cget.knots < 2) fail(s["knots"], "cget.knots", "must be >= 2");
      if (s["half_width"]) {
        cfg.cget.half_width = real(s["half_width"], "cget.half_width");
        if (!(cfg.cget.half_width > 0)) fail(s["half_width"], "cget.half_width", "must be > 0");
      }
      if (s["mc_per_width"]) cfg.cget.mc_per_width = positive(s["mc_per_width"], "cget.mc_per_width");
    }
    cfg.cget.n_test = cfg.n_test;
    if (const auto s = root["preprocess"]) {
      check_keys(s, "preprocess", {"degree", "eta", "methods"});
      if (s["degree"]) cfg.preprocess_degree = positive(s["degree"], "preprocess.degree");
      if (s["eta"]) cfg.preprocess_eta = eta(s["eta"], "preprocess.eta");
      if (s["methods"]) cfg.methods = names(s["methods"], "preprocess.methods", kPreprocessMethods);
    }
  }

  std::vector<std::string> names(const YAML::Node& node, const std::string& field,
                                 const std::set<std::string>& allowed) const {
    return list(node, field, [&](const YAML::Node& n, const std::string& f) {
      const auto s = text(n, f);
      if (!allowed.count(s)) {
        std::string all;
        for (const auto& a : allowed) all += (all.empty() ? "" : ", ") + a;
        fail(n, f, "unknown value '" + s + "' (expected one of " + all + ")");
      }
      return s;
    });
  }

  void validate(const YAML::Node& root, ExperimentConfig& cfg) const {
    if (cfg.kind == Kind::staircase) {
      for (std::size_t i = 0; i < cfg.targets.size(); ++i)
        if (!cfg.targets[i].polynomial)
          fail(root["targets"] ? root["targets"][i] : root["target"], "target",
               "the staircase oracle needs a polynomial link");
      return;
    }
    // Point at the node that set the offending field: the sweep axis when
    // there is one, else the train entry.
    auto locate = [&](const std::string& key) -> std::pair<YAML::Node, std::string> {
      if (root["sweep"] && root["sweep"][key]) return {root["sweep"][key], "sweep." + key};
      if (key == "n" && root["sweep"] && root["sweep"]["n_over_d"])
        return {root["sweep"]["n_over_d"], "sweep.n_over_d"};
      if (root["train"] && root["train"][key]) return {root["train"][key], "train." + key};
      return {root["train"] ? root["train"] : root, "train"};
    };
    for (const Cell& cell : expand_cells(cfg)) {
      if (cell.d < cfg.targets[cell.target].r()) {
        const auto [node, field] = locate("d");
        fail(node, field, "d = " + std::to_string(cell.d) + " is below the target's r");
      }
      try {
        cell_train_config(cfg, cell, cfg.seeds.front()).validate();
      } catch (const std::invalid_argument& e) {
        const std::string msg = e.what();
        const auto [node, field] = locate(msg.substr(0, msg.find(' ')));
        fail(node, field, msg + " (cell " + cell.name + ")");
      }
    }
    if (cfg.kind == Kind::second_step_orientation && cfg.train.T < 2) cfg.train.T = 2;
    if (cfg.kind == Kind::single_step) cfg.train.T = 1;
  }

 private:
  std::string source_;
};

}  // namespace

Kind parse_kind(const std::string& name) {
  for (const auto& [k, s] : kKindNames)
    if (s == name) return k;
  std::string all;
  for (const auto& [k, s] : kKindNames) all += (all.empty() ? "" : ", ") + s;
  throw std::invalid_argument("unknown experiment '" + name + "' (expected one of " + all + ")");
}

std::string to_string(Kind kind) {
  for (const auto& [k, s] : kKindNames)
    if (k == kind) return s;
  return "?";
}

int Scale::resolve(int d) const {
  return static_cast<int>(std::llround(coeff * std::pow(static_cast<double>(d), power)));
}

std::string Scale::describe() const {
  std::ostringstream os;
  if (power == 0.0) {
    os << coeff;
    return os.str();
  }
  if (coeff != 1.0) os << coeff;
  os << 'd';
  if (power != 1.0) os << '^' << power;
  return os.str();
}

Scale Scale::parse(const std::string& text) {
  static const std::regex re(R"(\s*([0-9]*\.?[0-9]+(?:[eE][+-]?[0-9]+)?)?\s*\*?\s*(d(?:\s*\^\s*([0-9]*\.?[0-9]+))?)?\s*)");
  std::smatch m;
  if (!std::regex_match(text, m, re) || (!m[1].matched && !m[2].matched))
    throw std::invalid_argument("cannot read '" + text + "' (expected e.g. 256, 4d, 16d^2)");
  Scale s;
  s.coeff = m[1].matched ? std::stod(m[1].str()) : 1.0;
  s.power = m[2].matched ? (m[3].matched ? std::stod(m[3].str()) : 1.0) : 0.0;
  if (!(s.coeff > 0)) throw std::invalid_argument("'" + text + "' must be positive");
  return s;
}

int TargetSpec::r() const {
  return polynomial ? Polynomial::parse(*polynomial).num_vars() : static_cast<int>(components.size());
}

MultiIndexTarget TargetSpec::build(int d) const {
  const int rr = r();
  Eigen::MatrixXd teacher = random_teacher ? MultiIndexTarget::random_teacher(rr, d, teacher_seed)
                                           : MultiIndexTarget::aligned_teacher(rr, d);
  if (polynomial) return MultiIndexTarget(std::move(teacher), Polynomial::parse(*polynomial));
  std::vector<Activation> acts;
  for (const auto& c : components) acts.push_back(Activation::parse(c));
  return MultiIndexTarget(std::move(teacher), std::move(acts));
}

std::string TargetSpec::describe() const {
  if (polynomial) return *polynomial;
  std::string s;
  for (std::size_t k = 0; k < components.size(); ++k)
    s += (k ? " + " : "") + components[k] + "(z" + std::to_string(k + 1) + ")";
  return s;
}

std::vector<Cell> expand_cells(const ExperimentConfig& config) {
  std::vector<Cell> cells;
  const bool many_targets = config.targets.size() > 1;
  for (int t = 0; t < static_cast<int>(config.targets.size()); ++t)
    for (int d : config.d_values)
      for (const Scale& ns : config.n_values)
        for (const Scale& ps : config.p_values) {
          Cell c;
          c.target = t;
          c.d = d;
          c.n = ns.resolve(d);
          c.p = ps.resolve(d);
          c.name = (many_targets ? "t" + std::to_string(t) + "_" : "") + "d" + std::to_string(d) +
                   "_p" + std::to_string(c.p) + "_n" + std::to_string(c.n);
          cells.push_back(std::move(c));
        }
  return cells;
}

TrainConfig cell_train_config(const ExperimentConfig& config, const Cell& cell, std::uint64_t seed) {
  TrainConfig tc = config.train;
  tc.d = cell.d;
  tc.p = cell.p;
  tc.n = cell.n;
  tc.seed = seed;
  return tc;
}

ExperimentConfig parse_config(const std::string& text, const std::string& source) {
  return Parser(source).parse(text);
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FileError("cannot read config " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), path.string());
}

}  // namespace giantstep::experiments
