#pragma once

#include <string>
#include <vector>

#include "experiments/runner.hpp"

namespace giantstep::experiments {

struct CriterionResult {
  int id = 0;
  std::string title;
  bool passed = false;
  std::string detail;
};

// Criteria attached to the run's experiment kind, evaluated on its tables.
// Empty when the kind (or its target) has no attached criteria.
std::vector<CriterionResult> evaluate_criteria(const RunResult& run);

// Individual checks, exposed for the acceptance binary.
CriterionResult check_leap_specialization(const RunResult& run);
CriterionResult check_alignment_scaling(const RunResult& run);
CriterionResult check_second_step_orientation(const RunResult& run);
CriterionResult check_staircase_catalogue(const RunResult& run);
CriterionResult check_norm_concentration(const RunResult& run);
CriterionResult check_spike_bulk(const RunResult& run);
CriterionResult check_cget(const RunResult& run);
CriterionResult check_feature_learning(const RunResult& run);
CriterionResult check_preprocessing(const RunResult& run);
CriterionResult check_lower_bound(const RunResult& run);

// Angular distance (degrees) of the point (x, y) from the line y = x.
double bisectrix_distance_deg(double x, double y);
// 180 minus the largest gap between line orientations in [0, 180).
double angular_spread_deg(std::vector<double> orientations_deg);

}  // namespace giantstep::experiments
