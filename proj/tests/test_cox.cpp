#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "survbench/cox.hpp"
#include "survbench/rng.hpp"
#include "oracles.hpp"
#include "test_util.hpp"

using namespace survbench;
using oracles::golden_section_max;
using oracles::grid_search_2d;
using oracles::naive_cox_loglik;
using testutil::rec;

namespace {

Dataset one_covariate_dataset(std::vector<SubjectRecord> records) {
  return testutil::make_dataset(std::move(records), {"x"});
}

}  // namespace

TEST_CASE("constant covariate is rejected as collinear") {
  auto data = one_covariate_dataset({rec("a", 1, 1, 0, {0.0}),
                                     rec("a", 2, 1, 0, {0.0}),
                                     rec("a", 3, 0, 0, {0.0})});
  ModelSpec spec;
  spec.covariate_names = {"x"};
  CHECK_THROWS_WITH_AS(fit_cox(data, spec), "collinear case mix",
                       std::runtime_error);
}

TEST_CASE("one-dimensional fit matches a golden-section oracle") {
  auto data = one_covariate_dataset({rec("a", 1, 1, 0, {1.0}),
                                     rec("a", 2, 1, 0, {0.0}),
                                     rec("a", 3, 1, 0, {1.0}),
                                     rec("a", 4, 0, 0, {0.0})});
  ModelSpec spec;
  spec.covariate_names = {"x"};
  const CoxFit fit = fit_cox(data, spec);
  REQUIRE(fit.converged);
  const double oracle = golden_section_max(data.records, -5.0, 5.0);
  CHECK(std::fabs(fit.beta[0] - oracle) <= 1e-4);
  CHECK(fit.log_likelihood >= naive_cox_loglik(data.records, {0.0}));
  CHECK(fit.score_norm <= 1e-6);
}

TEST_CASE("ten-subject two-covariate fit matches a grid-search oracle") {
  Rng rng(2024);
  for (int trial = 0; trial < 3; ++trial) {
    std::vector<SubjectRecord> records;
    for (int i = 0; i < 10; ++i) {
      const double x0 = rng.uniform01() < 0.5 ? 0.0 : 1.0;
      const double x1 = rng.normal(0.0, 0.8);
      const double t = -std::log(rng.uniform01()) * 5.0 /
                       std::exp(0.5 * x0 - 0.3 * x1);
      const int status = rng.uniform01() < 0.3 ? 0 : 1;
      records.push_back(rec("a", t, status, 0, {x0, x1}));
    }
    Dataset data = testutil::make_dataset(records, {"x0", "x1"});
    if (data.n_events() < 4) continue;

    ModelSpec spec;
    spec.covariate_names = {"x0", "x1"};
    CoxFit fit;
    try {
      fit = fit_cox(data, spec);
    } catch (const std::runtime_error&) {
      continue;  // singular draw
    }
    if (!fit.converged) continue;
    if (std::fabs(fit.beta[0]) > 2.5 || std::fabs(fit.beta[1]) > 2.5)
      continue;  // oracle box would clip
    const auto oracle = grid_search_2d(records);
    CHECK(std::fabs(fit.beta[0] - oracle[0]) <= 1e-3);
    CHECK(std::fabs(fit.beta[1] - oracle[1]) <= 1e-3);
  }
}

TEST_CASE("analytic score and information match finite differences") {
  Rng rng(31);
  std::vector<SubjectRecord> records;
  for (int i = 0; i < 15; ++i) {
    const double x0 = rng.normal(0.0, 1.0);
    const double x1 = rng.uniform01() < 0.5 ? 0.0 : 1.0;
    const double t = -std::log(rng.uniform01()) * 8.0;
    records.push_back(rec("a", t, rng.uniform01() < 0.25 ? 0 : 1, 0, {x0, x1}));
  }
  Dataset data = testutil::make_dataset(records, {"x0", "x1"});
  ModelSpec spec;
  spec.covariate_names = {"x0", "x1"};
  const std::vector<double> beta = {0.3, -0.2};
  const CoxLikelihood at = cox_partial_likelihood(data, spec, beta);

  const double h = 1e-5;
  for (std::size_t k = 0; k < 2; ++k) {
    auto bp = beta, bm = beta;
    bp[k] += h;
    bm[k] -= h;
    const double fd = (cox_partial_likelihood(data, spec, bp).loglik -
                       cox_partial_likelihood(data, spec, bm).loglik) /
                      (2.0 * h);
    CHECK(std::fabs(fd - at.score[k]) <=
          1e-4 * std::max(1.0, std::fabs(at.score[k])));
  }

  const double h2 = 1e-4;
  for (std::size_t a = 0; a < 2; ++a) {
    for (std::size_t b = 0; b < 2; ++b) {
      auto bpp = beta, bpm = beta, bmp = beta, bmm = beta;
      bpp[a] += h2; bpp[b] += h2;
      bpm[a] += h2; bpm[b] -= h2;
      bmp[a] -= h2; bmp[b] += h2;
      bmm[a] -= h2; bmm[b] -= h2;
      const double fd = -(cox_partial_likelihood(data, spec, bpp).loglik -
                          cox_partial_likelihood(data, spec, bpm).loglik -
                          cox_partial_likelihood(data, spec, bmp).loglik +
                          cox_partial_likelihood(data, spec, bmm).loglik) /
                        (4.0 * h2 * h2);
      CHECK(std::fabs(fd - at.information[a * 2 + b]) <=
            1e-4 * std::max(1.0, std::fabs(at.information[a * 2 + b])));
    }
  }
}

TEST_CASE("binary covariate fit solves the closed-form score equation") {
  Rng rng(8);
  std::vector<SubjectRecord> records;
  for (int i = 0; i < 14; ++i) {
    const double x = i % 2 == 0 ? 0.0 : 1.0;
    const double t = -std::log(rng.uniform01()) * 6.0 / std::exp(0.4 * x);
    records.push_back(rec("a", t, rng.uniform01() < 0.25 ? 0 : 1, 0, {x}));
  }
  Dataset data = testutil::make_dataset(records, {"x"});
  if (data.n_events() < 5) return;
  ModelSpec spec;
  spec.covariate_names = {"x"};
  const CoxFit fit = fit_cox(data, spec);
  if (!fit.converged) return;

  // U(b) = sum over events of [x_i - n1 e^b / (n0 + n1 e^b)], written from the
  // risk-set definition directly.
  auto score = [&](double b) {
    double u = 0.0;
    for (const auto& ev : records) {
      if (ev.status != 1) continue;
      double n0 = 0.0, n1 = 0.0;
      for (const auto& r : records) {
        if (r.entry_time < ev.time && ev.time <= r.time) {
          if (r.covariates[0] > 0.5)
            n1 += 1.0;
          else
            n0 += 1.0;
        }
      }
      u += ev.covariates[0] - n1 * std::exp(b) / (n0 + n1 * std::exp(b));
    }
    return u;
  };
  double lo = -10.0, hi = 10.0;
  REQUIRE(score(lo) > 0.0);
  REQUIRE(score(hi) < 0.0);
  while (hi - lo > 1e-12) {
    const double mid = 0.5 * (lo + hi);
    if (score(mid) > 0.0)
      lo = mid;
    else
      hi = mid;
  }
  CHECK(std::fabs(fit.beta[0] - 0.5 * (lo + hi)) <= 1e-8);
}

TEST_CASE("shifting one covariate changes neither beta nor subject hazards") {
  Rng rng(55);
  std::vector<SubjectRecord> records;
  for (int i = 0; i < 30; ++i) {
    const double x0 = rng.normal(0.0, 1.0);
    const double x1 = rng.normal(0.0, 1.0);
    const double t = -std::log(rng.uniform01()) * 5.0 / std::exp(0.3 * x0);
    records.push_back(rec("a", t, rng.uniform01() < 0.3 ? 0 : 1, 0, {x0, x1}));
  }
  Dataset data = testutil::make_dataset(records, {"x0", "x1"});
  ModelSpec spec;
  spec.covariate_names = {"x0", "x1"};
  const CoxFit fit = fit_cox(data, spec);

  Dataset shifted = data;
  for (auto& r : shifted.records) r.covariates[0] += 17.5;
  const CoxFit fit2 = fit_cox(shifted, spec);

  CHECK(std::fabs(fit.beta[0] - fit2.beta[0]) <= 1e-8);
  CHECK(std::fabs(fit.beta[1] - fit2.beta[1]) <= 1e-8);
  for (std::size_t i = 0; i < data.records.size(); ++i) {
    const double t = data.records[i].time;
    const double h1 = cumulative_hazard(fit, data.records[i].covariates,
                                        std::nullopt, t);
    const double h2 = cumulative_hazard(fit2, shifted.records[i].covariates,
                                        std::nullopt, t);
    CHECK(std::fabs(h1 - h2) <= 1e-8 * std::max(1.0, h1));
  }
}

TEST_CASE("linear predictor") {
  CoxFit fit;
  fit.beta = {1.0, 2.0};
  fit.covariate_names = {"a", "b"};
  CHECK(linear_predictor(fit, {0.0, 0.0}) == 0.0);
  CHECK(linear_predictor(fit, {3.0, -1.0}) == doctest::Approx(1.0));
  // additivity
  const double lp1 = linear_predictor(fit, {1.0, 2.0});
  const double lp2 = linear_predictor(fit, {0.5, -1.0});
  CHECK(linear_predictor(fit, {1.5, 1.0}) == doctest::Approx(lp1 + lp2));
  CHECK_THROWS_AS(linear_predictor(fit, {1.0}), std::invalid_argument);
}

TEST_CASE("cumulative hazard accessors") {
  auto data = one_covariate_dataset({rec("a", 1, 1, 0, {1.0}),
                                     rec("a", 2, 1, 0, {0.0}),
                                     rec("a", 3, 1, 0, {1.0}),
                                     rec("a", 4, 0, 0, {0.0})});
  ModelSpec spec;
  spec.covariate_names = {"x"};
  const CoxFit fit = fit_cox(data, spec);

  CHECK(cumulative_hazard(fit, {0.7}, std::nullopt, 0.0) == 0.0);
  CHECK(survival(fit, {0.7}, std::nullopt, 0.0) == 1.0);

  // with beta'x = 0 the hazard equals the raw baseline
  const double h_raw = fit.baselines[0].eval(2.5);
  CHECK(cumulative_hazard(fit, {0.0}, std::nullopt, 2.5) ==
        doctest::Approx(h_raw));

  // proportionality in x
  const double scale = std::exp(linear_predictor(fit, {0.9}));
  for (double t : {0.5, 1.0, 2.0, 3.5}) {
    CHECK(cumulative_hazard(fit, {0.9}, std::nullopt, t) ==
          doctest::Approx(scale * cumulative_hazard(fit, {0.0}, std::nullopt, t)));
  }

  // left limit at a jump
  CHECK(cumulative_hazard_left(fit, {0.0}, std::nullopt, 1.0) == 0.0);
  CHECK(cumulative_hazard_left(fit, {0.0}, std::nullopt, 1.5) ==
        doctest::Approx(fit.baselines[0].eval(1.0)));

  CHECK_THROWS_AS(cumulative_hazard(fit, {0.0}, "a", 1.0), std::invalid_argument);
}

TEST_CASE("breslow baseline jumps are d / sum of risk weights") {
  auto data = one_covariate_dataset({rec("a", 1, 1, 0, {1.0}),
                                     rec("a", 2, 1, 0, {0.0}),
                                     rec("a", 3, 1, 0, {1.0}),
                                     rec("a", 4, 0, 0, {0.0})});
  ModelSpec spec;
  spec.covariate_names = {"x"};
  const CoxFit fit = fit_cox(data, spec);
  const double b = fit.beta[0];
  const auto& h0 = fit.baselines[0];
  REQUIRE(h0.size() == 3);
  CHECK(h0.jump(0) == doctest::Approx(1.0 / (2.0 * std::exp(b) + 2.0)));
  CHECK(h0.jump(1) == doctest::Approx(1.0 / (std::exp(b) + 2.0)));
  CHECK(h0.jump(2) == doctest::Approx(1.0 / (std::exp(b) + 1.0)));
}

TEST_CASE("stratified fit shares beta and separates baselines") {
  Rng rng(17);
  std::vector<SubjectRecord> records;
  for (int c = 0; c < 3; ++c) {
    const std::string id = "c" + std::to_string(c);
    for (int i = 0; i < 20; ++i) {
      const double x = rng.normal(0.0, 1.0);
      const double scale = (c + 1) * 4.0;
      const double t = -std::log(rng.uniform01()) * scale / std::exp(0.5 * x);
      records.push_back(rec(id, t, rng.uniform01() < 0.25 ? 0 : 1, 0, {x}));
    }
  }
  Dataset data = testutil::make_dataset(records, {"x"});
  ModelSpec spec;
  spec.covariate_names = {"x"};
  spec.stratify_by_center = true;
  const CoxFit fit = fit_cox(data, spec);
  CHECK(fit.converged);
  CHECK(fit.stratified);
  REQUIRE(fit.baselines.size() == 3);
  REQUIRE(fit.strata.size() == 3);
  for (const auto& id : {"c0", "c1", "c2"})
    CHECK(fit.stratum_index.count(id) == 1);
  CHECK_THROWS_AS(fit.baseline(std::optional<std::string>{"zzz"}),
                  std::invalid_argument);
  CHECK_THROWS_AS(fit.baseline(std::nullopt), std::invalid_argument);

  // stratum without events
  records.push_back(rec("empty", 9.0, 0, 0, {0.1}));
  Dataset data2 = testutil::make_dataset(records, {"x"});
  CHECK_THROWS_WITH_AS(fit_cox(data2, spec), "stratum without events: empty",
                       std::invalid_argument);
}

TEST_CASE("missing covariates are rejected before fitting") {
  auto data = one_covariate_dataset(
      {rec("a", 1, 1, 0, {1.0}), rec("a", 2, 1, 0, {survbench::kMissing})});
  ModelSpec spec;
  spec.covariate_names = {"x"};
  CHECK_THROWS_AS(fit_cox(data, spec), std::invalid_argument);
}

TEST_CASE("baseline-only fit reproduces the nelson-aalen style hazard") {
  Dataset data = testutil::make_dataset(
      {rec("a", 1, 1), rec("a", 2, 0), rec("a", 3, 1)}, {});
  ModelSpec spec;  // no covariates
  const CoxFit fit = fit_cox(data, spec);
  CHECK(fit.converged);
  REQUIRE(fit.baselines[0].size() == 2);
  CHECK(fit.baselines[0].jump(0) == doctest::Approx(1.0 / 3.0));
  CHECK(fit.baselines[0].jump(1) == doctest::Approx(1.0));
}
