#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "survbench/funnel.hpp"
#include "survbench/types.hpp"

namespace survbench {

// Jackknife pseudo-values of the pooled death probability at tau:
// theta_i = n F(tau) - (n-1) F_{-i}(tau), with F = 1 - KM survival.
// Computed in O(n log n) via prefix decompositions of the leave-one-out
// product-limit factors; values may fall outside [0,1].
std::vector<double> pseudo_observations(const std::vector<SubjectRecord>& records,
                                        double tau);

// Marginal model for the pseudo-values: independence working correlation with
// a complementary-log-log mean, mu = 1 - exp(-exp(X beta)), fitted by
// Gauss-Newton on the estimating equations (intercept column supplied by the
// caller). The curved mean keeps fitted death probabilities inside (0,1),
// which the Pearson residual scale requires.
struct PseudoFit {
  std::vector<double> coefficients;
  std::vector<double> fitted;     // band-clamped to [-0.2, 1.2]
  std::vector<double> residuals;  // Pearson scale, mu clamped to [0.025, 0.975]
  std::size_t n_band_clamped = 0;
};

PseudoFit fit_pseudo_model(const std::vector<double>& pseudo_values,
                           const std::vector<std::vector<double>>& design_rows);

struct PredictionInterval {
  std::string center_id;
  double lower = 0.0;
  double upper = 0.0;
  double observed = 0.0;  // center KM death probability at tau
  double z_pseudo = 0.0;
  Classification classification = Classification::target;
};

struct BootstrapIntervals {
  std::vector<PredictionInterval> intervals;
  std::vector<std::string> flagged_centers;  // no risk set at tau in own KM
};

// Pearson-residual bootstrap: per replicate, residuals are resampled with
// replacement (from the centered pool), y* = mu + r* s reconstructed and
// averaged per center; the empirical (alpha/2, 1-alpha/2) quantiles over B
// replicates give the bounds. Quantiles use floor-based order statistics: the
// L-th and (B+1-L)-th order statistics with L = max(1, floor(alpha/2 * B)).
// observed is the center's own KM death probability at tau, held at its last
// value when nobody remains under follow-up at tau; such centers are flagged.
BootstrapIntervals bootstrap_prediction_intervals(const PseudoFit& fit,
                                                  const Dataset& data,
                                                  int replicates, double alpha,
                                                  std::uint64_t seed,
                                                  double tau);

// Z-score implied by the interval under a normal approximation: midpoint maps
// to 0, the bounds map to -+ z_{1-alpha/2}.
double pseudo_z(const PredictionInterval& interval, double alpha = 0.05);

// Whole comparator pipeline: pooled pseudo-values, [1 | covariates] design,
// bootstrap intervals and classifications.
struct PseudoComparison {
  PseudoFit fit;
  BootstrapIntervals result;
};

PseudoComparison run_pseudo_comparator(const Dataset& data, double tau,
                                       int replicates, double alpha,
                                       std::uint64_t seed);

// "center_id,observed,lower,upper,z_pseudo,classification" rows.
std::string prediction_intervals_csv(const std::vector<PredictionInterval>& intervals);

}  // namespace survbench
