#include "doctest.h"

#include <cmath>

#include "riarit/estimator.hpp"
#include "riarit/rng.hpp"

using namespace riarit;

TEST_SUITE("estimator") {

TEST_CASE("success below requirement moves up") {
  StudentEstimate at(1, 0.6);
  at.observe({0.5}, true);
  REQUIRE(at.levels()[0] == doctest::Approx(0.3));
  const auto r = at.observe({0.5}, true);
  CHECK(at.levels()[0] == doctest::Approx(0.42));
  CHECK(r.total == doctest::Approx(0.2));
  CHECK(r.per_kc[0] == doctest::Approx(0.2));
}

TEST_CASE("gate conditions") {
  StudentEstimate e(1, 0.6);
  e.observe({0.5 / 0.6}, true);  // c = 0.5
  REQUIRE(e.levels()[0] == doctest::Approx(0.5));

  SUBCASE("success on an easier exercise changes nothing") {
    const auto r = e.observe({0.2}, true);
    CHECK(e.levels()[0] == doctest::Approx(0.5));
    CHECK(r.total == 0.0);
  }
  SUBCASE("failure on an easier exercise moves down") {
    const auto r = e.observe({0.3}, false);
    CHECK(r.total == doctest::Approx(-0.2));
    CHECK(e.levels()[0] == doctest::Approx(0.38));
  }
  SUBCASE("failure on a harder exercise changes nothing") {
    const auto r = e.observe({0.9}, false);
    CHECK(r.total == 0.0);
    CHECK(e.levels()[0] == doctest::Approx(0.5));
  }
}

TEST_CASE("value-semantics update leaves the input alone") {
  const StudentEstimate e(2, 0.6);
  const auto u = update(e, {0.5, 0.1}, true);
  CHECK(e.levels() == CompetenceVector{0.0, 0.0});
  CHECK(u.estimate.levels()[0] == doctest::Approx(0.3));
  CHECK(u.reward.total == doctest::Approx(0.6));
  CHECK(u.reward.per_kc.size() == 2);
}

TEST_CASE("fixed point") {
  StudentEstimate e(1, 1.0);
  e.observe({0.7}, true);
  REQUIRE(e.levels()[0] == 0.7);
  CHECK(e.observe({0.7}, true).total == 0.0);
  CHECK(e.observe({0.7}, false).total == 0.0);
  CHECK(e.levels()[0] == 0.7);
}

TEST_CASE("repeated successes close the gap geometrically") {
  for (double alpha : {0.1, 0.6, 0.95}) {
    for (double q : {0.25, 0.504, 1.0}) {
      StudentEstimate e(1, alpha);
      for (int k = 1; k <= 60; ++k) {
        e.observe({q}, true);
        CHECK(std::abs((q - e.levels()[0]) - std::pow(1 - alpha, k) * q) <= 1e-12);
        CHECK(e.levels()[0] <= q + 1e-12);
      }
    }
  }
}

TEST_CASE("sign and range under random outcomes") {
  Rng rng(5);
  StudentEstimate e(6, 0.6);
  for (int step = 0; step < 20000; ++step) {
    CompetenceVector q(6);
    for (auto& x : q) x = rng.uniform();
    const bool ok = rng.bernoulli(0.5);
    const auto r = e.observe(q, ok);
    if (ok) {
      CHECK(r.total >= 0.0);
    } else {
      CHECK(r.total <= 0.0);
    }
    double sum = 0.0;
    for (double x : r.per_kc) {
      CHECK(std::abs(x) <= 1.0);
      sum += x;
    }
    CHECK(sum == doctest::Approx(r.total));
    for (double c : e.levels()) {
      CHECK(c >= 0.0);
      CHECK(c <= 1.0);
    }
  }
}

TEST_CASE("alpha outside (0,1] is rejected") {
  CHECK_THROWS(StudentEstimate(1, 0.0));
  CHECK_THROWS(StudentEstimate(1, 1.5));
}

} // TEST_SUITE
