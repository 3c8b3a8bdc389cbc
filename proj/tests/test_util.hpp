#pragma once

#include <string>
#include <vector>

#include "survbench/rng.hpp"
#include "survbench/types.hpp"

namespace testutil {

inline survbench::SubjectRecord rec(const std::string& center, double time,
                                    int status, double entry = 0.0,
                                    std::vector<double> covs = {}) {
  survbench::SubjectRecord r;
  r.center_id = center;
  r.time = time;
  r.status = status;
  r.entry_time = entry;
  r.covariates = std::move(covs);
  return r;
}

inline survbench::Dataset make_dataset(std::vector<survbench::SubjectRecord> records,
                                       std::vector<std::string> covariate_names = {}) {
  survbench::Dataset d;
  d.records = std::move(records);
  d.covariate_names = std::move(covariate_names);
  d.rebuild_index();
  return d;
}

// Random cohort with continuous (tie-free) times and a mix of events and
// censorings.
inline std::vector<survbench::SubjectRecord> random_cohort(survbench::Rng& rng,
                                                           std::size_t n,
                                                           double censor_frac = 0.35) {
  std::vector<survbench::SubjectRecord> out;
  for (std::size_t i = 0; i < n; ++i) {
    const double t = -std::log(rng.uniform01()) * 10.0 + rng.uniform01() * 1e-6;
    const int status = rng.uniform01() < censor_frac ? 0 : 1;
    out.push_back(rec("c", t, status));
  }
  return out;
}

}  // namespace testutil
