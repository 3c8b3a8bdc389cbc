#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "survbench/estimators.hpp"
#include "survbench/rng.hpp"
#include "test_util.hpp"

using namespace survbench;
using testutil::rec;

TEST_CASE("kaplan-meier on three events") {
  const auto s = kaplan_meier({rec("a", 1, 1), rec("a", 2, 1), rec("a", 3, 1)});
  CHECK(s.eval(1.0) == doctest::Approx(2.0 / 3.0));
  CHECK(s.eval(2.0) == doctest::Approx(1.0 / 3.0));
  CHECK(s.eval(3.0) == doctest::Approx(0.0));
  CHECK(s.size() == 3);  // knots at event times only
}

TEST_CASE("kaplan-meier with a censoring in between") {
  const auto s = kaplan_meier({rec("a", 1, 1), rec("a", 2, 0), rec("a", 3, 1)});
  CHECK(s.eval(1.0) == doctest::Approx(2.0 / 3.0));
  CHECK(s.eval(2.0) == doctest::Approx(2.0 / 3.0));
  CHECK(s.eval(2.5) == doctest::Approx(2.0 / 3.0));
  CHECK(s.eval(3.0) == doctest::Approx(0.0));
  CHECK(s.size() == 2);
}

TEST_CASE("single censored subject keeps the identity curve") {
  const auto s = kaplan_meier({rec("a", 5, 0)});
  CHECK(s.eval(100.0) == 1.0);
  CHECK(s.size() == 0);
}

TEST_CASE("kaplan-meier errors") {
  CHECK_THROWS_WITH_AS(kaplan_meier({}), "empty cohort", std::invalid_argument);
  // An event whose subject never entered the risk set (invariant-violating
  // input constructed directly).
  std::vector<SubjectRecord> bad = {rec("a", 2, 1, 3.0), rec("a", 5, 0, 3.0)};
  CHECK_THROWS_WITH_AS(kaplan_meier(bad), "empty risk set", std::invalid_argument);
}

TEST_CASE("left truncation shrinks early risk sets") {
  // Second subject enters only at t=1.5, so the first event sees one at risk.
  const auto s = kaplan_meier({rec("a", 1, 1), rec("a", 3, 1, 1.5)});
  CHECK(s.eval(1.0) == doctest::Approx(0.0));
}

TEST_CASE("reverse kaplan-meier basics") {
  SUBCASE("all events -> identity") {
    const auto g = reverse_kaplan_meier({rec("a", 1, 1), rec("a", 2, 1)});
    CHECK(g.eval(5.0) == 1.0);
    CHECK(g.size() == 0);
  }
  SUBCASE("two censorings and one event") {
    const auto g =
        reverse_kaplan_meier({rec("a", 1, 0), rec("a", 2, 0), rec("a", 3, 1)});
    CHECK(g.eval(1.0) == doctest::Approx(2.0 / 3.0));
    CHECK(g.eval(2.0) == doctest::Approx(1.0 / 3.0));
  }
}

TEST_CASE("reverse KM equals KM on flipped statuses") {
  Rng rng(77);
  for (int trial = 0; trial < 20; ++trial) {
    auto cohort = testutil::random_cohort(rng, 30);
    auto flipped = cohort;
    for (auto& r : flipped) r.status = 1 - r.status;
    const auto g = reverse_kaplan_meier(cohort);
    const auto k = kaplan_meier(flipped);
    REQUIRE(g.size() == k.size());
    for (std::size_t i = 0; i < g.size(); ++i) {
      CHECK(g.knots()[i] == k.knots()[i]);
      CHECK(g.values()[i] == k.values()[i]);
    }
  }
}

TEST_CASE("S*G equals the empirical proportion beyond t for tie-free data") {
  Rng rng(12345);
  for (int trial = 0; trial < 25; ++trial) {
    auto cohort = testutil::random_cohort(rng, 40);
    const auto s = kaplan_meier(cohort);
    const auto g = reverse_kaplan_meier(cohort);
    for (const auto& r : cohort) {
      const double prod = s.eval(r.time) * g.eval(r.time);
      double beyond = 0.0;
      for (const auto& other : cohort)
        if (other.time > r.time) beyond += 1.0;
      beyond /= static_cast<double>(cohort.size());
      CHECK(std::fabs(prod - beyond) <= 1e-12);
    }
  }
}

TEST_CASE("KM is invariant to time rescaling") {
  Rng rng(99);
  auto cohort = testutil::random_cohort(rng, 25);
  const auto s = kaplan_meier(cohort);
  for (double c : {0.001, 30.4375, 12.0}) {
    auto scaled = cohort;
    for (auto& r : scaled) {
      r.time *= c;
      r.entry_time *= c;
    }
    const auto s2 = kaplan_meier(scaled);
    REQUIRE(s2.size() == s.size());
    for (std::size_t i = 0; i < s.size(); ++i) {
      CHECK(s2.knots()[i] == doctest::Approx(s.knots()[i] * c).epsilon(1e-12));
      CHECK(s2.values()[i] == s.values()[i]);
    }
  }
}

TEST_CASE("hazard steps recover the product-limit factors") {
  const auto g =
      reverse_kaplan_meier({rec("a", 1, 0), rec("a", 2, 0), rec("a", 3, 1)});
  const auto h = hazard_steps_from_survival(g);
  REQUIRE(h.size() == 2);
  CHECK(h.jump(0) == doctest::Approx(1.0 / 3.0));  // c(1)/n(1)
  CHECK(h.jump(1) == doctest::Approx(1.0 / 2.0));  // c(2)/n(2)
  CHECK(h.initial_value() == 0.0);
}

TEST_CASE("hazard steps stop once survival reaches zero") {
  StepFunction surv(1.0, {1.0, 2.0, 3.0}, {0.5, 0.0, 0.0});
  const auto h = hazard_steps_from_survival(surv);
  CHECK(h.jump(0) == doctest::Approx(0.5));
  CHECK(h.jump(1) == doctest::Approx(1.0));
  CHECK(h.jump(2) == doctest::Approx(0.0));
}
