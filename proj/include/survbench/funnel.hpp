#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "survbench/cox.hpp"
#include "survbench/types.hpp"

namespace survbench {

enum class Multiplicity { none, bonferroni };
enum class FunnelLevel { inner, outer };
enum class Classification { over, target, under };
enum class OutcomeKind { death, loss_to_followup };

std::string to_string(Classification c);

struct BenchmarkConfig {
  double tau = 12.0;
  double alpha = 0.05;
  Multiplicity multiplicity = Multiplicity::bonferroni;
  int min_center_size = 1;       // centers below this are not benchmarked
  bool imputation_enabled = true;
  int g_pool_threshold = 10;     // centers smaller than this reuse the pooled G
};

struct CenterSummary {
  std::string center_id;
  std::size_t n = 0;
  int observed = 0;       // O
  double expected = 0.0;  // E = sum p_ij
  double variance = 0.0;  // V = sum p_ij (1 - p_ij)
  double z = 0.0;
  double oe_ratio = 0.0;
  double eff_n = 0.0;
  double p_exact = 1.0;
  Classification classification = Classification::target;
  bool degenerate = false;  // V == 0; excluded from the funnel
};

struct FunnelGeometry {
  double p0 = 0.0;          // pooled event proportion
  double alpha = 0.05;
  double alpha_prime = 0.05;
  double z_inner = 0.0;     // z_{1 - alpha/2}
  double z_outer = 0.0;     // z_{1 - alpha'/2}
};

struct ChartPoint {
  std::string center_id;
  double eff_n = 0.0;
  double oe_ratio = 0.0;
  Classification classification = Classification::target;
};

struct FunnelChart {
  FunnelGeometry geometry;
  std::vector<ChartPoint> points;
  std::vector<double> curve_x;  // effective-sample-size grid
  std::vector<double> inner_lower, inner_upper, outer_lower, outer_upper;
  std::size_t count_over = 0, count_target = 0, count_under = 0;
  std::string x_label = "Effective sample size";
  std::string y_label = "Observed / Expected";
};

// Counters filled while evaluating event probabilities; raw sums above
// 1 + 1e-6 are worth a diagnostic.
struct ProbabilityDiagnostics {
  std::size_t clamped = 0;
  double worst_excess = 0.0;
  void note(double raw);
};

// Discrete analogue of the event probability within tau for one subject:
// sum over baseline jump times s <= tau of h0(s) exp(beta'x) S(s-) G(s-),
// clamped into [0,1]. The fit must be pooled (unstratified).
double event_probability(const CoxFit& fit, const std::vector<double>& x,
                         const StepFunction& center_followup, double tau,
                         ProbabilityDiagnostics* diag = nullptr);

// Loss-to-follow-up probability within tau: sum over pooled censoring times
// s <= tau of hC(s) G(s-) S(s-), with S from the subject's center stratum.
// The fit must be stratified by center.
double followup_probability(const CoxFit& stratified_fit,
                            const StepFunction& pooled_followup,
                            const StepFunction& censoring_hazard,
                            const std::vector<double>& x,
                            const std::string& center, double tau,
                            ProbabilityDiagnostics* diag = nullptr);

// Pooled proportion p0: mean over all subjects of the indicator of the
// outcome occurring within tau.
double pooled_event_proportion(const Dataset& data, double tau,
                               OutcomeKind kind = OutcomeKind::death);

// O, E, V, Z, O/E, effective sample size, exact p-value and classification
// for one center. probs must align with indices. Degenerate centers (V = 0)
// carry NaN z/eff_n and are flagged.
CenterSummary summarize_center(const Dataset& data,
                               const std::vector<std::size_t>& indices,
                               const std::vector<double>& probs,
                               const BenchmarkConfig& config, double p0,
                               OutcomeKind kind = OutcomeKind::death);

// (E^2 / V) * (1 - p0) / p0; equals the center size when all p_ij = p0.
double effective_sample_size(double expected, double variance, double p0);

FunnelGeometry make_funnel_geometry(double p0, double alpha,
                                    Multiplicity multiplicity,
                                    std::size_t n_centers);

// Limits 1 -+ z sqrt((1-p0)/p0) / sqrt(x) in effective-sample-size
// coordinates, and 1 -+ z / sqrt(x) in raw precision coordinates x = E^2/V.
std::pair<double, double> funnel_limits(double x, const FunnelGeometry& g,
                                        FunnelLevel level);
std::pair<double, double> funnel_limits_raw(double x, const FunnelGeometry& g,
                                            FunnelLevel level);

struct ImputationEntry {
  std::string covariate;
  std::size_t n_imputed = 0;
  double fill_value = 0.0;
};

struct ImputationResult {
  Dataset data;
  std::vector<ImputationEntry> report;
};

// Replaces each missing covariate value by the median of that covariate among
// patients with an observed favorable outcome (known alive at tau). Throws
// when a covariate is missing for every favorable patient.
ImputationResult impute_case_mix(const Dataset& data, double tau);

// Chart descriptor with limit curves sampled over the observed eff_n range.
// Throws when every summary is degenerate.
FunnelChart build_funnel_chart(const std::vector<CenterSummary>& summaries,
                               const FunnelGeometry& geometry);

// Structured text form of the chart (round-trips with funnel_chart_from_text).
std::string funnel_chart_to_text(const FunnelChart& chart);
FunnelChart funnel_chart_from_text(const std::string& text);

// "center_id,n,O,E,V,Z,oe_ratio,eff_n,p_exact,classification" rows, sorted by
// center id; degenerate centers carry empty Z/eff_n fields.
std::string center_summaries_csv(const std::vector<CenterSummary>& summaries);

// Full mortality / follow-up benchmarking pipelines shared by the CLI and the
// simulation laboratory.
struct MortalityBenchmark {
  CoxFit fit;
  std::vector<CenterSummary> summaries;
  FunnelGeometry geometry;
  std::vector<ImputationEntry> imputation;
  std::vector<std::string> warnings;
  std::size_t clamped_probabilities = 0;
};

struct FollowupBenchmark {
  CoxFit fit;
  std::vector<CenterSummary> summaries;
  FunnelGeometry geometry;
  std::vector<ImputationEntry> imputation;
  std::vector<std::string> warnings;
  bool degenerate = false;  // no losses anywhere
};

MortalityBenchmark benchmark_mortality(const Dataset& data,
                                       const BenchmarkConfig& config);
FollowupBenchmark benchmark_followup(const Dataset& data,
                                     const BenchmarkConfig& config);

}  // namespace survbench
