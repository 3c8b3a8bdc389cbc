#pragma once

#include <string>

#include "survbench/simulation.hpp"

namespace survbench {

// Scenario files are strict key-value text; unknown keys are errors.
// Recognized keys: name, n_centers, center_size_mean, center_size_sd,
// censoring_log_shape_mean, censoring_log_rate_mean, censoring_log_shape_sd,
// censoring_log_rate_sd, censoring_log_corr, covariate_between_var,
// covariate_within_var, covariate_beta, baseline_shape, baseline_rate,
// frailty_log_variance, same_followup, same_followup_log_shape,
// same_followup_log_rate, non_ph, tau, replications, bootstrap_replicates,
// seed.
ScenarioConfig parse_scenario_text(const std::string& text);
ScenarioConfig load_scenario_file(const std::string& path);

std::string scenario_to_text(const ScenarioConfig& config);

}  // namespace survbench
