#include "experiments/criteria.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <map>
#include <numbers>
#include <sstream>

#include "experiments/errors.hpp"
#include "giantstep/cget.hpp"
#include "giantstep/hermite_tensor.hpp"
#include "giantstep/metrics.hpp"
#include "giantstep/staircase.hpp"

namespace giantstep::experiments {

namespace {

constexpr double kDeg = 180.0 / std::numbers::pi;

std::string fmt(double v, int prec = 4) {
  std::ostringstream os;
  os.precision(prec);
  os << v;
  return os.str();
}

const Table& table_of(const CellOutput& c, const std::string& name) {
  auto it = c.tables.find(name);
  if (it == c.tables.end()) throw SchemaError("cell " + c.cell.name + ": no '" + name + "' table");
  return it->second;
}

Polynomial link_of(const RunResult& run, int target) {
  return run.config.targets.at(target).build(run.config.targets.at(target).r()).polynomial_approximation();
}

// Median over seeds of one statistic, per d (sorted by d).
std::map<int, double> scaling_medians(const RunResult& run, const std::string& stat) {
  std::map<int, std::vector<double>> by_d;
  for (const auto& c : run.cells) {
    const Table t = table_of(c, "scaling").filter("statistic", stat);
    for (std::size_t i = 0; i < t.rows(); ++i) by_d[static_cast<int>(t.number(i, "d"))].push_back(t.number(i, "value"));
  }
  std::map<int, double> out;
  for (auto& [d, v] : by_d) out[d] = median(v);
  return out;
}

std::string describe_series(const std::map<int, double>& s) {
  std::string out;
  for (const auto& [d, v] : s) out += (out.empty() ? "" : " ") + std::to_string(d) + ":" + fmt(v);
  return out;
}

bool has_statistic(const RunResult& run, const std::string& stat) {
  return std::find(run.config.statistics.begin(), run.config.statistics.end(), stat) !=
         run.config.statistics.end();
}

double mean(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return v.empty() ? 0.0 : s / v.size();
}

struct CatalogueEntry {
  const char* link;
  std::vector<std::vector<std::vector<double>>> spans;  // per t, spanning vectors
};

const std::vector<CatalogueEntry>& catalogue() {
  static const std::vector<CatalogueEntry> c = {
      {"z1 + z2 + z1^2 - z2^2", {{}, {{1, 1}}, {{1, 0}, {0, 1}}, {{1, 0}, {0, 1}}}},
      {"z1 + z2 + z1^2 + z2^2", {{}, {{1, 1}}, {{1, 1}}, {{1, 1}}}},
      {"z1 + z2*z3", {{}, {{1, 0, 0}}, {{1, 0, 0}}, {{1, 0, 0}}}},
      {"z1/3 + 2*z1*z2/3 + z2*z3",
       {{}, {{1, 0, 0}}, {{1, 0, 0}, {0, 1, 0}}, {{1, 0, 0}, {0, 1, 0}, {0, 0, 1}}}},
      {"z1/3 + 2*He2(z1)*z2 + z1*z3",
       {{}, {{1, 0, 0}}, {{1, 0, 0}, {0, 1, 0}, {0, 0, 1}}, {{1, 0, 0}, {0, 1, 0}, {0, 0, 1}}}},
      {"z1 + z1^2 + z1^3 + z2 + z2^2 + z2^3 + z3 + z3^2 + z3^3",
       {{}, {{1, 1, 1}}, {{1, 1, 1}}, {{1, 1, 1}}}},
  };
  return c;
}

Subspace span_of(const std::vector<std::vector<double>>& vecs, int r) {
  Eigen::MatrixXd M(r, static_cast<Eigen::Index>(vecs.size()));
  for (std::size_t j = 0; j < vecs.size(); ++j)
    for (int i = 0; i < r; ++i) M(i, static_cast<Eigen::Index>(j)) = vecs[j][i];
  return vecs.empty() ? Subspace(r) : Subspace::span(M);
}

bool same_polynomial(const Polynomial& a, const Polynomial& b) {
  return a.num_vars() == b.num_vars() && (a - b).is_zero();
}

// The scaling claim is for leap >= 2 targets with n = d.
bool data_scarce_leap2(const RunResult& run) {
  try {
    if (leap_index(link_of(run, 0)) < 2) return false;
  } catch (const std::domain_error&) {
    return false;
  }
  for (const auto& c : run.cells)
    if (c.cell.n != c.cell.d) return false;
  return true;
}

}  // namespace

double bisectrix_distance_deg(double x, double y) {
  double theta = std::atan2(y, x) * kDeg - 45.0;  // angle from the line's direction
  theta = std::fmod(std::fmod(theta, 180.0) + 180.0, 180.0);
  return std::min(theta, 180.0 - theta);
}

double angular_spread_deg(std::vector<double> o) {
  if (o.empty()) return 0.0;
  for (double& x : o) x = std::fmod(std::fmod(x, 180.0) + 180.0, 180.0);
  std::sort(o.begin(), o.end());
  double gap = o.front() + 180.0 - o.back();
  for (std::size_t i = 1; i < o.size(); ++i) gap = std::max(gap, o[i] - o[i - 1]);
  return 180.0 - gap;
}

CriterionResult check_leap_specialization(const RunResult& run) {
  CriterionResult res{1, "single-step specialization by leap index", false, ""};
  const int leap = leap_index(link_of(run, 0));
  double min_fraction = 1.0, min_cos1 = 1.0, min_cos2 = 1.0, min_spread = 180.0;
  for (const auto& c : run.cells) {
    const Table& t = table_of(c, "alignment");
    if (leap == 1) {
      int close = 0;
      for (std::size_t i = 0; i < t.rows(); ++i)
        if (bisectrix_distance_deg(t.number(i, "gcos_1"), t.number(i, "gcos_2")) <= 10.0) ++close;
      min_fraction = std::min(min_fraction, t.rows() ? static_cast<double>(close) / t.rows() : 0.0);
    } else {
      double m1 = 0.0, m2 = 0.0;
      std::vector<double> orient;
      for (std::size_t i = 0; i < t.rows(); ++i) {
        const double x = t.number(i, "cos_1"), y = t.number(i, "cos_2");
        const double nrm = std::hypot(x, y);
        if (nrm == 0.0) continue;
        m1 = std::max(m1, std::abs(x / nrm));
        m2 = std::max(m2, std::abs(y / nrm));
        orient.push_back(std::atan2(y, x) * kDeg);
      }
      min_cos1 = std::min(min_cos1, m1);
      min_cos2 = std::min(min_cos2, m2);
      min_spread = std::min(min_spread, angular_spread_deg(orient));
    }
  }
  if (leap == 1) {
    res.passed = min_fraction >= 0.90;
    res.detail = "leap 1: fraction within 10 deg of bisectrix = " + fmt(min_fraction) + " (need >= 0.90)";
  } else {
    res.passed = min_cos1 >= 0.6 && min_cos2 >= 0.6 && min_spread >= 60.0;
    res.detail = "leap " + std::to_string(leap) + ": max|cos1| = " + fmt(min_cos1) + ", max|cos2| = " +
                 fmt(min_cos2) + " (need >= 0.6), spread = " + fmt(min_spread) + " deg (need >= 60)";
  }
  return res;
}

CriterionResult check_alignment_scaling(const RunResult& run) {
  CriterionResult res{2, "alignment ratio scaling in the data-scarce regime", false, ""};
  const auto med = scaling_medians(run, "alignment_ratio");
  std::vector<double> x, y;
  for (const auto& [d, v] : med) {
    x.push_back(d);
    y.push_back(v);
  }
  if (x.size() < 2) {
    res.detail = "need at least two values of d";
    return res;
  }
  const double slope = loglog_slope(x, y);
  res.passed = slope >= -0.75 && slope <= -0.25;
  res.detail = "slope = " + fmt(slope) + " (need in [-0.75, -0.25]); medians " + describe_series(med);
  return res;
}

CriterionResult check_second_step_orientation(const RunResult& run) {
  CriterionResult res{3, "second-step gradient orientation", true, ""};
  for (const auto& c : run.cells) {
    const Table& t = table_of(c, "orientation");
    const Table& pred = table_of(c, "prediction");
    const int r = static_cast<int>(t.columns().size()) - 4;
    for (int s : {1, -1}) {
      Eigen::VectorXd sum = Eigen::VectorXd::Zero(r), p(r);
      const Table ps = pred.filter("a_sign", std::to_string(s));
      if (ps.rows() != 1) throw SchemaError("prediction table needs one row per sign");
      for (int k = 0; k < r; ++k) p(k) = ps.number(0, "pred_" + std::to_string(k + 1));
      const Table ts = t.filter("a_sign", std::to_string(s));
      for (std::size_t i = 0; i < ts.rows(); ++i)
        for (int k = 0; k < r; ++k) sum(k) += ts.number(i, "dir_" + std::to_string(k + 1));
      const double dist = sum.norm() > 0 ? 1.0 - sum.normalized().dot(p.normalized()) : 1.0;
      res.passed = res.passed && dist <= 0.1;
      res.detail += std::string(res.detail.empty() ? "" : "; ") + c.cell.name + (s > 0 ? " a>0" : " a<0") +
                    ": cosine distance = " + fmt(dist) + " (need <= 0.1)";
    }
  }
  return res;
}

CriterionResult check_staircase_catalogue(const RunResult& run) {
  CriterionResult res{4, "staircase oracle matches the catalogued answers", true, ""};
  const auto& targets = run.staircase.at("targets");
  const auto start = std::chrono::steady_clock::now();
  int found = 0;
  for (const auto& entry : catalogue()) {
    const Polynomial g = Polynomial::parse(entry.link);
    const int r = g.num_vars();
    // Fresh oracle run against the catalogue.
    const auto seq = staircase_sequence(g, 3);
    bool ok = true;
    for (std::size_t t = 0; t < entry.spans.size(); ++t) ok = ok && seq[t].same_as(span_of(entry.spans[t], r));
    for (std::size_t t = 1; t < seq.size(); ++t)
      ok = ok && seq[t].basis().leftCols(seq[t - 1].dim()).isApprox(seq[t - 1].basis()) ;
    // Stored answer, when the run contains this target.
    for (const auto& stored : targets) {
      if (!same_polynomial(Polynomial::parse(stored.at("target").get<std::string>()), g)) continue;
      ++found;
      const auto& sseq = stored.at("sequence");
      for (std::size_t t = 0; t < entry.spans.size() && t < sseq.size(); ++t) {
        const auto cols = sseq[t].at("basis").get<std::vector<std::vector<double>>>();
        ok = ok && span_of(cols, r).same_as(span_of(entry.spans[t], r)) &&
             static_cast<int>(cols.size()) == sseq[t].at("dim").get<int>();
      }
      ok = ok && sseq.size() >= entry.spans.size();
      break;
    }
    if (!ok) {
      res.passed = false;
      res.detail += std::string(res.detail.empty() ? "" : "; ") + "mismatch for " + entry.link;
    }
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  if (found < static_cast<int>(catalogue().size())) {
    res.passed = false;
    res.detail += std::string(res.detail.empty() ? "" : "; ") + "run contains " + std::to_string(found) + " of " +
                  std::to_string(catalogue().size()) + " catalogued targets";
  }
  res.passed = res.passed && secs <= 1.0;
  res.detail += std::string(res.detail.empty() ? "" : "; ") + "oracle time " + fmt(secs, 3) + " s (need <= 1)";
  return res;
}

CriterionResult check_norm_concentration(const RunResult& run) {
  CriterionResult res{5, "first-step norm concentration", false, ""};
  const auto med = scaling_medians(run, "norm_deviation");
  if (med.empty()) {
    res.detail = "no norm_deviation values";
    return res;
  }
  std::vector<double> x, y;
  for (const auto& [d, v] : med)
    if (d >= 128) {
      x.push_back(d);
      y.push_back(v);
    }
  const double at_max = med.rbegin()->second;
  const double slope = x.size() >= 2 ? loglog_slope(x, y) : std::nan("");
  res.passed = at_max <= 0.10 && slope >= -0.8 && slope <= -0.2;
  res.detail = "median deviation at d=" + std::to_string(med.rbegin()->first) + " = " + fmt(at_max) +
               " (need <= 0.10), slope over d>=128 = " + fmt(slope) + " (need in [-0.8, -0.2]); medians " +
               describe_series(med);
  return res;
}

CriterionResult check_spike_bulk(const RunResult& run) {
  CriterionResult res{6, "spike+bulk remainder bounds", true, ""};
  for (const std::string stat : {"delta_op", "delta_teacher"}) {
    if (!has_statistic(run, stat)) continue;
    const auto med = scaling_medians(run, stat);
    bool mono = true;
    double prev = INFINITY;
    for (const auto& [d, v] : med) {
      mono = mono && v <= prev;
      prev = v;
    }
    res.passed = res.passed && mono && med.size() >= 2;
    res.detail += std::string(res.detail.empty() ? "" : "; ") + stat + " medians " + describe_series(med) +
                  (mono ? " non-increasing" : " not non-increasing");
  }
  if (res.detail.empty()) {
    res.passed = false;
    res.detail = "no delta statistics";
  }
  return res;
}

CriterionResult check_cget(const RunResult& run) {
  CriterionResult res{7, "conditional Gaussian equivalence", true, ""};
  for (const auto& c : run.cells) {
    const Table& t = table_of(c, "cget");
    const double ck = mean(t.numbers("err_ck")), cl = mean(t.numbers("err_cl"));
    const double rel = std::abs(ck - cl) / ck;
    res.passed = res.passed && rel <= 0.05;
    res.detail += std::string(res.detail.empty() ? "" : "; ") + c.cell.name + ": mean err_CK = " + fmt(ck) +
                  ", mean err_CL = " + fmt(cl) + ", relative gap = " + fmt(rel) + " (need <= 0.05)";
  }
  return res;
}

namespace {

// Median test error per method for one cell; gd at its smallest T.
std::map<std::string, double> method_medians(const Table& t) {
  std::map<std::string, std::vector<double>> v;
  int min_T = INT32_MAX;
  for (std::size_t i = 0; i < t.rows(); ++i)
    if (t.text(i, "method") == "gd") min_T = std::min(min_T, static_cast<int>(t.number(i, "T")));
  for (std::size_t i = 0; i < t.rows(); ++i) {
    const std::string& m = t.text(i, "method");
    if (m == "gd" && static_cast<int>(t.number(i, "T")) != min_T) continue;
    v[m].push_back(t.number(i, "mse"));
  }
  std::map<std::string, double> out;
  for (auto& [m, x] : v) out[m] = median(x);
  return out;
}

}  // namespace

CriterionResult check_feature_learning(const RunResult& run) {
  CriterionResult res{8, "feature learning beats random features selectively", true, ""};
  for (const auto& c : run.cells) {
    if (c.cell.n < 8 * c.cell.d) continue;  // the claim is for n >= 8d
    const auto med = method_medians(table_of(c, "generalization"));
    if (!med.count("gd") || !med.count("rf")) throw SchemaError("cell " + c.cell.name + ": need gd and rf rows");
    const bool learnable = is_staircase_learnable(link_of(run, c.cell.target));
    const double gd = med.at("gd"), rf = med.at("rf");
    bool ok;
    std::string what;
    if (learnable) {
      ok = gd <= 0.5 * rf;
      what = "gd/rf = " + fmt(gd / rf) + " (need <= 0.5)";
    } else {
      ok = std::abs(gd - rf) / rf <= 0.2;
      what = "|gd-rf|/rf = " + fmt(std::abs(gd - rf) / rf) + " (need <= 0.2)";
    }
    res.passed = res.passed && ok;
    res.detail += std::string(res.detail.empty() ? "" : "; ") +
                  run.config.targets[c.cell.target].describe() + " [" + c.cell.name + "]: gd = " + fmt(gd) +
                  ", rf = " + fmt(rf) + ", " + what;
  }
  return res;
}

CriterionResult check_preprocessing(const RunResult& run) {
  CriterionResult res{9, "label preprocessing raises the effective leap", true, ""};
  for (const auto& c : run.cells) {
    const Table& co = table_of(c, "coefficients");
    const double shrink = median(co.numbers("raw_norm")) / median(co.numbers("adjusted_norm"));
    const Table& t = table_of(c, "preprocessing");
    const double van = median(t.filter("method", "vanilla").numbers("mse"));
    const double pre = median(t.filter("method", "preprocessed").numbers("mse"));
    const bool ok = shrink >= 5.0 && pre < van;
    res.passed = res.passed && ok;
    res.detail += std::string(res.detail.empty() ? "" : "; ") + c.cell.name +
                  ": low-degree coefficient shrink = " + fmt(shrink) + "x (need >= 5), preprocessed mse = " +
                  fmt(pre) + " vs vanilla " + fmt(van) + " (need <)";
  }
  return res;
}

CriterionResult check_lower_bound(const RunResult& run) {
  CriterionResult res{10, "test error respects the conditional-variance lower bound", true, ""};
  for (const auto& c : run.cells) {
    const Polynomial g = link_of(run, c.cell.target);
    if (is_staircase_learnable(g)) continue;
    const Subspace U = staircase_sequence(g).back();
    double bound = conditionally_nonlinear_mass_exact(g, U);
    if (run.config.normalize_error) bound /= (g * g).expectation() - std::pow(g.expectation(), 2);
    const Table& t = table_of(c, "generalization");
    double worst = INFINITY;
    for (std::size_t i = 0; i < t.rows(); ++i) {
      const std::string& m = t.text(i, "method");
      if (m == "gd" || m == "rf") worst = std::min(worst, t.number(i, "mse"));
    }
    res.passed = res.passed && worst >= bound - 0.1;
    res.detail += std::string(res.detail.empty() ? "" : "; ") + run.config.targets[c.cell.target].describe() +
                  " [" + c.cell.name + "]: bound = " + fmt(bound) + " (dim U = " + std::to_string(U.dim()) +
                  "), smallest trained error = " + fmt(worst) + " (need >= bound - 0.1)";
  }
  if (res.detail.empty()) {
    res.passed = false;
    res.detail = "no target without the staircase property";
  }
  return res;
}

std::vector<CriterionResult> evaluate_criteria(const RunResult& run) {
  const auto& cfg = run.config;
  std::vector<CriterionResult> out;
  switch (cfg.kind) {
    case Kind::single_step: {
      const Polynomial g = link_of(run, 0);
      int leap = 0;
      try {
        leap = leap_index(g);
      } catch (const std::domain_error&) {
      }
      if (g.num_vars() == 2 && (leap == 1 || leap == 2)) out.push_back(check_leap_specialization(run));
      break;
    }
    case Kind::scaling:
      if (has_statistic(run, "alignment_ratio") && data_scarce_leap2(run)) out.push_back(check_alignment_scaling(run));
      if (has_statistic(run, "norm_deviation")) out.push_back(check_norm_concentration(run));
      if (has_statistic(run, "delta_op") || has_statistic(run, "delta_teacher")) out.push_back(check_spike_bulk(run));
      break;
    case Kind::second_step_orientation: out.push_back(check_second_step_orientation(run)); break;
    case Kind::staircase: {
      bool any = false;
      for (const auto& entry : catalogue())
        for (const auto& stored : run.staircase.at("targets"))
          any = any || same_polynomial(Polynomial::parse(stored.at("target").get<std::string>()),
                                       Polynomial::parse(entry.link));
      if (any) out.push_back(check_staircase_catalogue(run));
      break;
    }
    case Kind::cget: out.push_back(check_cget(run)); break;
    case Kind::generalization_sweep: {
      bool has_gd = false, has_rf = false, unlearnable = false;
      for (const auto& m : cfg.methods) {
        has_gd = has_gd || m == "gd";
        has_rf = has_rf || m == "rf";
      }
      for (std::size_t t = 0; t < cfg.targets.size(); ++t)
        unlearnable = unlearnable || !is_staircase_learnable(link_of(run, static_cast<int>(t)));
      bool large_n = false;
      for (const auto& c : run.cells) large_n = large_n || c.cell.n >= 8 * c.cell.d;
      if (has_gd && has_rf && large_n) out.push_back(check_feature_learning(run));
      if (unlearnable) out.push_back(check_lower_bound(run));
      break;
    }
    case Kind::preprocessing: {
      const auto& m = cfg.methods;
      if (std::count(m.begin(), m.end(), "vanilla") && std::count(m.begin(), m.end(), "preprocessed"))
        out.push_back(check_preprocessing(run));
      break;
    }
    case Kind::multi_step: break;
  }
  return out;
}

}  // namespace giantstep::experiments
