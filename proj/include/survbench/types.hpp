#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <map>
#include <string>
#include <vector>

namespace survbench {

// Missing covariate marker. Never treated as a numeric value; imputation
// replaces it before any model fit.
inline constexpr double kMissing = std::numeric_limits<double>::quiet_NaN();

inline bool is_missing(double v) { return std::isnan(v); }

// One patient: follow-up window (entry_time, time], event indicator and
// case-mix covariates. Times are in months by convention; the math is
// unit-free.
struct SubjectRecord {
  std::string center_id;
  double entry_time = 0.0;  // left-truncation entry, 0 when none
  double time = 0.0;        // observed time T = min(event, censoring)
  int status = 0;           // 1 = event (death), 0 = censored
  std::vector<double> covariates;
};

// A cohort of subjects across centers, with a deterministic center index
// (sorted by center_id).
struct Dataset {
  std::vector<SubjectRecord> records;
  std::vector<std::string> covariate_names;
  std::map<std::string, std::vector<std::size_t>> center_index;

  std::size_t covariate_arity() const { return covariate_names.size(); }
  std::size_t n_events() const;

  // Recomputes center_index from records.
  void rebuild_index();

  // Throws std::invalid_argument on the first violated invariant:
  // time > entry_time, finite times, status in {0,1}, covariate arity,
  // at least one event overall.
  void validate() const;
};

// Right-continuous piecewise-constant function of time. Holds KM curves,
// reverse-KM curves and cumulative baseline hazards. The default-constructed
// function is identically 0.
class StepFunction {
 public:
  StepFunction() = default;

  explicit StepFunction(double initial_value)
      : initial_(initial_value) {}

  // knots strictly increasing; values[k] is the value on [knots[k], knots[k+1]).
  StepFunction(double initial_value, std::vector<double> knots,
               std::vector<double> values);

  // f(t), right-continuous.
  double eval(double t) const;

  // f(t-), the limit from the left; equals eval(t) except at knots.
  double eval_left(double t) const;

  double initial_value() const { return initial_; }
  const std::vector<double>& knots() const { return knots_; }
  const std::vector<double>& values() const { return values_; }
  std::size_t size() const { return knots_.size(); }

  // values[k] - values[k-1] (or - initial_value for k = 0).
  double jump(std::size_t k) const;

  // Two-column "time,value" CSV, starting with the value at time 0.
  std::string to_csv() const;

 private:
  double initial_ = 0.0;
  std::vector<double> knots_;
  std::vector<double> values_;
};

}  // namespace survbench
