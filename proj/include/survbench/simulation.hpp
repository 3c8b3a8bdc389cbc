#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "survbench/types.hpp"

namespace survbench {

// Parameterization of one simulated benchmarking world. Weibull distributions
// use the cumulative-hazard convention H(t) = (rate * t)^shape throughout.
struct ScenarioConfig {
  std::string name = "base";
  int n_centers = 300;

  // Center sizes: negative binomial by mean/sd, resampled while < 1.
  double center_size_mean = 200.0;
  double center_size_sd = 150.0;

  // Per-center censoring Weibull: (log shape, log rate) bivariate normal.
  double censoring_log_shape_mean = 0.4;
  double censoring_log_rate_mean = -4.8;
  double censoring_log_shape_sd = 0.24;
  double censoring_log_rate_sd = 1.72;
  double censoring_log_corr = -0.87;

  // Single case-mix covariate: center effect + subject effect, both normal.
  double covariate_between_var = 0.056;
  double covariate_within_var = 0.224;
  double covariate_beta = 1.0;

  // Event-time Weibull baseline.
  double baseline_shape = 0.94;
  double baseline_rate = 0.032;

  // Log-normal frailty multiplying the per-center event-time rate.
  double frailty_log_variance = 0.0;

  // One shared censoring Weibull for every center.
  bool same_followup = false;
  double same_followup_log_shape = 0.4;
  double same_followup_log_rate = 0.8;

  // Shapes re-solved so every center has the same baseline survival at tau.
  bool non_ph = false;

  double tau = 12.0;
  int replications = 50;
  int bootstrap_replicates = 1000;
  std::uint64_t seed = 20240901;

  void validate() const;
};

// Named presets matching the seven study scenarios.
ScenarioConfig scenario_preset(const std::string& name);
std::vector<std::string> scenario_preset_names();

// Reduces a configuration to desk scale: at most 100 centers, 20 replications
// and 200 bootstrap replicates.
ScenarioConfig desk_scale(ScenarioConfig config);

struct CenterTruth {
  std::string center_id;
  std::size_t size = 0;
  double censoring_shape = 0.0;
  double censoring_rate = 0.0;
  double frailty = 1.0;
  double event_shape = 0.0;  // after any non-PH re-solve
  double event_rate = 0.0;
};

struct SimulatedDataset {
  Dataset data;
  std::vector<CenterTruth> centers;
};

// Draws one full replicate. Deterministic in replicate_seed.
SimulatedDataset generate_dataset(const ScenarioConfig& config,
                                  std::uint64_t replicate_seed);

// Shape a_i with (b_i t*)^{a_i} = (b0 t*)^{a0}; throws "shape unsolvable"
// when b_i t* = 1.
double solve_nonph_shape(double center_rate, double base_shape,
                         double base_rate, double t_star);

struct CenterDiagnostic {
  std::string scenario;
  int replicate = 0;
  std::string center_id;
  std::size_t n = 0;
  int observed = 0;
  double expected = 0.0;
  double variance = 0.0;
  double z_funnel = 0.0;
  double z_pseudo = 0.0;  // NaN when the comparator excluded the center
  double censoring_shape = 0.0;
  double censoring_rate = 0.0;
};

struct SimulationSummary {
  std::string scenario;
  int replications = 0;
  int replications_dropped = 0;
  double z_mean = 0.0;
  double z_sd = 0.0;
  double funnel_under_pct = 0.0, funnel_target_pct = 0.0, funnel_over_pct = 0.0;
  double pseudo_under_pct = 0.0, pseudo_target_pct = 0.0, pseudo_over_pct = 0.0;
  double mcse_coverage = 0.0;  // sqrt(p(1-p) / (R * n_centers)), p = target frac
};

struct ScenarioResult {
  SimulationSummary summary;
  std::vector<CenterDiagnostic> diagnostics;
};

// Runs all replicates of a scenario: pooled Cox benchmark, per-center funnel
// summaries and the pseudo-observation comparator. Replicates whose model fit
// fails are dropped and counted; more than 5% drops is an error. Results are
// identical for any thread count.
ScenarioResult run_scenario(const ScenarioConfig& config, int threads = 1);

// Monte Carlo standard error of a coverage proportion pooled over
// R * n_centers center-replicates.
double coverage_mcse(double p, int replications, int n_centers);

// Study-style results table, one row per scenario:
// scenario,z_mean,z_sd,funnel_under,funnel_target,funnel_over,
// pseudo_under,pseudo_target,pseudo_over
std::string summarize_table(const std::vector<SimulationSummary>& summaries);

std::string diagnostics_csv(const std::vector<CenterDiagnostic>& rows);

}  // namespace survbench
