#include "survbench/estimators.hpp"

#include <algorithm>
#include <stdexcept>

namespace survbench {

namespace {

struct Obs {
  double entry;
  double time;
  int status;
};

// Product-limit core over (entry, time, status). The risk set at s is
// {entry < s <= time}; with tied times the estimator's events use the full
// risk set, so censored-at-s subjects still count.
StepFunction product_limit(std::vector<Obs> obs) {
  if (obs.empty()) throw std::invalid_argument("empty cohort");

  std::sort(obs.begin(), obs.end(),
            [](const Obs& a, const Obs& b) { return a.time < b.time; });
  std::vector<double> entries(obs.size());
  for (std::size_t i = 0; i < obs.size(); ++i) entries[i] = obs[i].entry;
  std::sort(entries.begin(), entries.end());

  std::vector<double> knots, values;
  double surv = 1.0;
  std::size_t i = 0;            // next obs to leave the risk set (by time)
  std::size_t entered = 0;      // entries strictly below current time
  std::size_t left = 0;         // times strictly below current time
  const std::size_t n = obs.size();

  while (i < n) {
    const double t = obs[i].time;
    std::size_t d = 0, tied = 0;
    while (i + tied < n && obs[i + tied].time == t) {
      if (obs[i + tied].status == 1) ++d;
      ++tied;
    }
    if (d > 0) {
      while (entered < n && entries[entered] < t) ++entered;
      // left counts observations with time < t, already consumed below
      const std::size_t at_risk = entered - left;
      if (at_risk == 0) throw std::invalid_argument("empty risk set");
      surv *= 1.0 - static_cast<double>(d) / static_cast<double>(at_risk);
      knots.push_back(t);
      values.push_back(surv);
    }
    i += tied;
    left += tied;
  }
  return StepFunction(1.0, std::move(knots), std::move(values));
}

}  // namespace

StepFunction kaplan_meier(const std::vector<SubjectRecord>& records) {
  std::vector<Obs> obs;
  obs.reserve(records.size());
  for (const auto& r : records) obs.push_back({r.entry_time, r.time, r.status});
  return product_limit(std::move(obs));
}

StepFunction kaplan_meier(const Dataset& data,
                          const std::vector<std::size_t>& indices) {
  std::vector<Obs> obs;
  obs.reserve(indices.size());
  for (std::size_t i : indices) {
    const auto& r = data.records[i];
    obs.push_back({r.entry_time, r.time, r.status});
  }
  return product_limit(std::move(obs));
}

StepFunction reverse_kaplan_meier(const std::vector<SubjectRecord>& records) {
  std::vector<Obs> obs;
  obs.reserve(records.size());
  for (const auto& r : records)
    obs.push_back({r.entry_time, r.time, 1 - r.status});
  return product_limit(std::move(obs));
}

StepFunction reverse_kaplan_meier(const Dataset& data,
                                  const std::vector<std::size_t>& indices) {
  std::vector<Obs> obs;
  obs.reserve(indices.size());
  for (std::size_t i : indices) {
    const auto& r = data.records[i];
    obs.push_back({r.entry_time, r.time, 1 - r.status});
  }
  return product_limit(std::move(obs));
}

StepFunction hazard_steps_from_survival(const StepFunction& survival) {
  std::vector<double> knots = survival.knots();
  std::vector<double> cumhaz(knots.size());
  double cum = 0.0;
  double prev = survival.initial_value();
  for (std::size_t k = 0; k < knots.size(); ++k) {
    const double cur = survival.values()[k];
    if (prev > 0.0) cum += 1.0 - cur / prev;
    cumhaz[k] = cum;
    prev = cur;
  }
  return StepFunction(0.0, std::move(knots), std::move(cumhaz));
}

}  // namespace survbench
