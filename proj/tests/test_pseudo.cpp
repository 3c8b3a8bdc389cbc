#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "survbench/estimators.hpp"
#include "survbench/normal.hpp"
#include "survbench/pseudo.hpp"
#include "survbench/rng.hpp"
#include "test_util.hpp"

using namespace survbench;
using testutil::rec;

namespace {

// Independent oracle: recompute the Kaplan-Meier leave-one-out estimate from
// scratch for every subject.
std::vector<double> loo_oracle(const std::vector<SubjectRecord>& records,
                               double tau) {
  const double n = static_cast<double>(records.size());
  const double f_full = 1.0 - kaplan_meier(records).eval(tau);
  std::vector<double> out;
  for (std::size_t i = 0; i < records.size(); ++i) {
    std::vector<SubjectRecord> rest;
    for (std::size_t j = 0; j < records.size(); ++j)
      if (j != i) rest.push_back(records[j]);
    double f_loo = 0.0;
    bool has_event = false;
    for (const auto& r : rest)
      if (r.status == 1) has_event = true;
    if (has_event) {
      f_loo = 1.0 - kaplan_meier(rest).eval(tau);
    }
    out.push_back(n * f_full - (n - 1.0) * f_loo);
  }
  return out;
}

}  // namespace

TEST_CASE("no censoring reduces pseudo-values to indicators") {
  std::vector<SubjectRecord> records = {rec("a", 1, 1), rec("a", 2, 1),
                                        rec("a", 3, 1), rec("a", 4, 1),
                                        rec("a", 5, 1)};
  const auto pv = pseudo_observations(records, 3.5);
  for (std::size_t i = 0; i < records.size(); ++i) {
    const double indicator = records[i].time <= 3.5 ? 1.0 : 0.0;
    CHECK(pv[i] == doctest::Approx(indicator).epsilon(1e-12));
  }
}

TEST_CASE("four-subject worked example matches direct recomputation") {
  std::vector<SubjectRecord> records = {rec("a", 1, 1), rec("a", 1, 1),
                                        rec("a", 2, 0), rec("a", 3, 1)};
  const double tau = 2.5;
  const auto pv = pseudo_observations(records, tau);
  const auto oracle = loo_oracle(records, tau);
  REQUIRE(pv.size() == 4);
  for (std::size_t i = 0; i < 4; ++i)
    CHECK(pv[i] == doctest::Approx(oracle[i]).epsilon(1e-12));
}

TEST_CASE("fast pseudo-values equal the leave-one-out oracle") {
  Rng rng(64);
  for (int trial = 0; trial < 30; ++trial) {
    const std::size_t n = 3 + rng.uniform_int(25);
    std::vector<SubjectRecord> records;
    for (std::size_t i = 0; i < n; ++i) {
      // integer-ish times force plenty of ties
      const double t = 1.0 + static_cast<double>(rng.uniform_int(12));
      records.push_back(rec("a", t, rng.uniform01() < 0.6 ? 1 : 0));
    }
    bool has_event = false;
    for (const auto& r : records) has_event |= r.status == 1;
    if (!has_event) continue;
    const double tau = 1.0 + rng.uniform01() * 12.0;
    const auto pv = pseudo_observations(records, tau);
    const auto oracle = loo_oracle(records, tau);
    for (std::size_t i = 0; i < n; ++i)
      CHECK(std::fabs(pv[i] - oracle[i]) < 1e-11);
  }
}

TEST_CASE("pseudo-value mean recovers the pooled estimate") {
  Rng rng(1001);
  for (int trial = 0; trial < 40; ++trial) {
    auto records = testutil::random_cohort(rng, 5 + rng.uniform_int(60));
    bool has_event = false;
    double tmax = 0.0;
    for (const auto& r : records) {
      has_event |= r.status == 1;
      tmax = std::max(tmax, r.time);
    }
    if (!has_event) continue;
    const double tau = tmax * 0.6;
    const auto pv = pseudo_observations(records, tau);
    double mean = 0.0;
    for (double v : pv) mean += v;
    mean /= static_cast<double>(pv.size());
    const double f_hat = 1.0 - kaplan_meier(records).eval(tau);
    CHECK(std::fabs(mean - f_hat) <= 1e-12);
  }
}

TEST_CASE("pseudo-values require two subjects") {
  CHECK_THROWS_AS(pseudo_observations({rec("a", 1, 1)}, 2.0),
                  std::invalid_argument);
}

TEST_CASE("intercept-only model fits the mean") {
  std::vector<double> pv = {0.1, 0.4, 0.9, 1.05, -0.05};
  std::vector<std::vector<double>> design(pv.size(), {1.0});
  const auto fit = fit_pseudo_model(pv, design);
  const double mean = (0.1 + 0.4 + 0.9 + 1.05 - 0.05) / 5.0;
  REQUIRE(fit.coefficients.size() == 1);
  CHECK(fit.coefficients[0] ==
        doctest::Approx(std::log(-std::log(1.0 - mean))));
  for (double f : fit.fitted) CHECK(f == doctest::Approx(mean));
  // residuals share a common scale, so they sum to about zero
  double rsum = 0.0;
  for (double r : fit.residuals) rsum += r;
  CHECK(rsum == doctest::Approx(0.0).epsilon(1e-10));
}

TEST_CASE("binary covariate model fits group means") {
  std::vector<double> pv = {0.2, 0.4, 0.9, 0.7, 0.3, 0.8};
  std::vector<std::vector<double>> design = {{1, 0}, {1, 0}, {1, 1},
                                             {1, 1}, {1, 0}, {1, 1}};
  const auto fit = fit_pseudo_model(pv, design);
  const double mean0 = (0.2 + 0.4 + 0.3) / 3.0;
  const double mean1 = (0.9 + 0.7 + 0.8) / 3.0;
  CHECK(fit.fitted[0] == doctest::Approx(mean0));
  CHECK(fit.fitted[2] == doctest::Approx(mean1));
  // coefficients live on the link scale
  const double eta0 = std::log(-std::log(1.0 - mean0));
  const double eta1 = std::log(-std::log(1.0 - mean1));
  CHECK(fit.coefficients[0] == doctest::Approx(eta0));
  CHECK(fit.coefficients[1] == doctest::Approx(eta1 - eta0));
}

TEST_CASE("singular design is rejected") {
  std::vector<double> pv = {0.2, 0.4, 0.6};
  std::vector<std::vector<double>> design = {{1, 2}, {1, 2}, {1, 2}};
  CHECK_THROWS_WITH_AS(fit_pseudo_model(pv, design), "singular design",
                       std::runtime_error);
}

TEST_CASE("extreme pseudo-values keep fitted probabilities inside (0,1)") {
  std::vector<double> pv = {-3.0, -3.0, 4.0, 4.0};
  std::vector<std::vector<double>> design = {{1, 0}, {1, 0}, {1, 1}, {1, 1}};
  const auto fit = fit_pseudo_model(pv, design);
  CHECK(fit.n_band_clamped == 0);
  for (double f : fit.fitted) {
    CHECK(f > -0.2);
    CHECK(f < 1.2);
  }
  for (double r : fit.residuals) CHECK(std::isfinite(r));
}

TEST_CASE("pseudo_z maps the interval to a normal scale") {
  PredictionInterval pi;
  pi.lower = 0.2;
  pi.upper = 0.4;

  pi.observed = 0.3;
  CHECK(pseudo_z(pi) == doctest::Approx(0.0));
  pi.observed = 0.4;
  CHECK(pseudo_z(pi) == doctest::Approx(1.959964).epsilon(1e-6));
  pi.observed = 0.35;
  CHECK(pseudo_z(pi) == doctest::Approx(0.979982).epsilon(1e-5));

  pi.upper = pi.lower;
  CHECK_THROWS_AS(pseudo_z(pi), std::invalid_argument);
}

TEST_CASE("bootstrap intervals: determinism and quantile bookkeeping") {
  // Two-subject center with residuals -+0.5 around mu = 0.5: replicate means
  // live on {0.25, 0.5, 0.75}.
  Dataset data =
      testutil::make_dataset({rec("a", 20, 0), rec("a", 30, 0)}, {});
  PseudoFit fit;
  fit.fitted = {0.5, 0.5};
  fit.residuals = {-1.0, 1.0};
  const auto a = bootstrap_prediction_intervals(fit, data, 1000, 0.05, 7, 12.0);
  const auto b = bootstrap_prediction_intervals(fit, data, 1000, 0.05, 7, 12.0);
  REQUIRE(a.intervals.size() == 1);
  CHECK(a.intervals[0].lower == b.intervals[0].lower);
  CHECK(a.intervals[0].upper == b.intervals[0].upper);
  CHECK(a.intervals[0].lower <= a.intervals[0].upper);
  // attainable means only
  const double lo = a.intervals[0].lower, hi = a.intervals[0].upper;
  auto attainable = [](double v) {
    return std::fabs(v - 0.0) < 1e-12 || std::fabs(v - 0.25) < 1e-12 ||
           std::fabs(v - 0.5) < 1e-12 || std::fabs(v - 0.75) < 1e-12 ||
           std::fabs(v - 1.0) < 1e-12;
  };
  CHECK(attainable(lo));
  CHECK(attainable(hi));
  CHECK_THROWS_AS(bootstrap_prediction_intervals(fit, data, 99, 0.05, 7, 12.0),
                  std::invalid_argument);
}

TEST_CASE("centers without a risk set at tau are flagged but classified") {
  Dataset data = testutil::make_dataset(
      {rec("a", 20, 0), rec("a", 30, 0), rec("b", 3, 1), rec("b", 4, 1)}, {});
  PseudoFit fit;
  fit.fitted = {0.5, 0.5, 0.5, 0.5};
  fit.residuals = {-0.5, 0.5, -0.5, 0.5};
  const auto result =
      bootstrap_prediction_intervals(fit, data, 200, 0.05, 3, 12.0);
  REQUIRE(result.flagged_centers.size() == 1);
  CHECK(result.flagged_centers[0] == "b");
  REQUIRE(result.intervals.size() == 2);
  // the flagged center's observed freezes at the last KM value (here 1: both
  // subjects died before tau)
  CHECK(result.intervals[1].center_id == "b");
  CHECK(result.intervals[1].observed == doctest::Approx(1.0));
}

TEST_CASE("interval width shrinks with center size") {
  Rng rng(2718);
  const std::vector<std::size_t> sizes = {15, 60, 240, 960};
  std::vector<double> mean_width(sizes.size(), 0.0);
  const int datasets = 3;
  for (int trial = 0; trial < datasets; ++trial) {
    std::vector<SubjectRecord> records;
    for (std::size_t s = 0; s < sizes.size(); ++s) {
      const std::string id = "size" + std::to_string(s);
      for (std::size_t i = 0; i < sizes[s]; ++i) {
        const int dead = rng.uniform01() < 0.3 ? 1 : 0;
        records.push_back(rec(id, dead ? 5.0 + rng.uniform01() : 20.0, dead));
      }
    }
    Dataset data = testutil::make_dataset(records, {});
    const auto cmp = run_pseudo_comparator(data, 12.0, 400, 0.05,
                                           1000 + static_cast<unsigned>(trial));
    REQUIRE(cmp.result.intervals.size() == sizes.size());
    for (const auto& pi : cmp.result.intervals) {
      const std::size_t s = static_cast<std::size_t>(pi.center_id.back() - '0');
      mean_width[s] += (pi.upper - pi.lower) / datasets;
    }
  }
  for (std::size_t s = 1; s < sizes.size(); ++s)
    CHECK(mean_width[s] < mean_width[s - 1]);
}

TEST_CASE("no-censoring comparator agrees with a binomial interval") {
  Rng rng(31415);
  const double p_true = 0.3, tau = 12.0;
  std::vector<SubjectRecord> records;
  const int n_centers = 40, center_n = 80;
  for (int c = 0; c < n_centers; ++c) {
    char id[8];
    std::snprintf(id, sizeof(id), "c%03d", c);
    for (int i = 0; i < center_n; ++i) {
      const int dead = rng.uniform01() < p_true ? 1 : 0;
      records.push_back(rec(id, dead ? 2.0 + 8.0 * rng.uniform01() : 25.0, dead));
    }
  }
  Dataset data = testutil::make_dataset(records, {});
  const auto cmp = run_pseudo_comparator(data, tau, 2000, 0.05, 99);
  REQUIRE(cmp.result.intervals.size() == static_cast<std::size_t>(n_centers));

  double pooled = 0.0;
  for (const auto& r : data.records)
    if (r.status == 1 && r.time <= tau) pooled += 1.0;
  pooled /= static_cast<double>(data.records.size());
  const double z = normal_quantile(0.975);
  const double half = z * std::sqrt(pooled * (1.0 - pooled) /
                                    static_cast<double>(center_n));

  int agree = 0;
  for (const auto& pi : cmp.result.intervals) {
    Classification binom = Classification::target;
    if (pi.observed < pooled - half) binom = Classification::over;
    if (pi.observed > pooled + half) binom = Classification::under;
    if (binom == pi.classification) ++agree;
  }
  CHECK(agree >= static_cast<int>(0.95 * n_centers));
}
