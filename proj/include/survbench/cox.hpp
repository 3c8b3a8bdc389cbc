#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "survbench/types.hpp"

namespace survbench {

// Proportional-hazards benchmark model specification. Ties are handled with
// the Breslow approximation throughout.
struct ModelSpec {
  std::vector<std::string> covariate_names;
  bool stratify_by_center = false;
  int max_iter = 50;
  double tolerance = 1e-9;  // relative log-likelihood change
};

// Fitted benchmark model: coefficients plus the Breslow cumulative baseline
// hazard per stratum (a single stratum when unstratified). Immutable after
// fitting; safe for concurrent reads.
struct CoxFit {
  std::vector<std::string> covariate_names;
  std::vector<double> beta;
  bool stratified = false;
  std::vector<std::string> strata;       // stratum ids, empty if unstratified
  std::vector<StepFunction> baselines;   // cumulative H0 per stratum
  std::map<std::string, std::size_t> stratum_index;
  double log_likelihood = 0.0;
  int iterations = 0;
  bool converged = false;
  double score_norm = 0.0;

  const StepFunction& baseline(const std::optional<std::string>& stratum) const;
};

// Maximizes the Breslow-tie log partial likelihood by Newton-Raphson with
// step-halving, starting from beta = 0. Covariates are centered internally at
// their event-weighted means; beta and baselines are reported on the original
// scale. Throws "collinear case mix" on a singular information matrix and an
// error naming the stratum when a stratum has no events. Non-convergence
// yields converged = false rather than an exception.
CoxFit fit_cox(const Dataset& data, const ModelSpec& spec);

// Log partial likelihood with its analytic score and information (row-major
// p x p), evaluated at an arbitrary beta on the original covariate scale.
struct CoxLikelihood {
  double loglik = 0.0;
  std::vector<double> score;
  std::vector<double> information;
};
CoxLikelihood cox_partial_likelihood(const Dataset& data, const ModelSpec& spec,
                                     const std::vector<double>& beta);

double linear_predictor(const CoxFit& fit, const std::vector<double>& x);

// H_ij(t) = sum over baseline jump times s <= t of h0(s) * exp(beta'x).
double cumulative_hazard(const CoxFit& fit, const std::vector<double>& x,
                         const std::optional<std::string>& stratum, double t);
double cumulative_hazard_left(const CoxFit& fit, const std::vector<double>& x,
                              const std::optional<std::string>& stratum,
                              double t);

// S(t) = exp(-H(t)) and the left-limit variant S(t-).
double survival(const CoxFit& fit, const std::vector<double>& x,
                const std::optional<std::string>& stratum, double t);
double survival_left(const CoxFit& fit, const std::vector<double>& x,
                     const std::optional<std::string>& stratum, double t);

// Human-readable coefficient table plus convergence diagnostics.
std::string fit_report_text(const CoxFit& fit);

// "stratum,time,jump" CSV of the Breslow baseline jumps.
std::string baseline_jumps_csv(const CoxFit& fit);

}  // namespace survbench
