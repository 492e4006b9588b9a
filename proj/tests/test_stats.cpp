#include "doctest.h"

#include <cmath>
#include <stdexcept>
#include <vector>

#include "riarit/stats.hpp"

using namespace riarit;

TEST_SUITE("stats") {

TEST_CASE("moments and quantiles") {
  const std::vector<double> xs{7, 1, 3, 9, 5, 2};
  CHECK(stats::mean(xs) == doctest::Approx(27.0 / 6));
  CHECK(stats::variance(xs) == doctest::Approx(9.5));
  const auto f = stats::five_number(xs);
  CHECK(f.min == 1);
  CHECK(f.q1 == doctest::Approx(2.25));
  CHECK(f.median == doctest::Approx(4.0));
  CHECK(f.q3 == doctest::Approx(6.5));
  CHECK(f.max == 9);
  CHECK(stats::quantile({4.0}, 0.3) == 4.0);
}

// reference values from an independent statistics package
TEST_CASE("welch test") {
  const std::vector<double> a{19.1, 21.3, 20.4, 18.8, 22.0, 20.9};
  const std::vector<double> b{21.5, 23.0, 20.1, 22.4, 24.3, 22.8, 21.9};
  const auto r = stats::welch_t_test(a, b);
  CHECK(r.t == doctest::Approx(2.6181536183589467).epsilon(1e-9));
  CHECK(r.df == doctest::Approx(10.842030639726435).epsilon(1e-9));
  CHECK(r.p_greater == doctest::Approx(0.012081478312353516).epsilon(1e-6));
  CHECK(r.p_less == doctest::Approx(1 - 0.012081478312353516).epsilon(1e-6));
  CHECK(r.mean_diff > 0);
}

TEST_CASE("paired test") {
  const std::vector<double> a{3.1, 2.8, 3.6, 3.3, 2.9};
  const std::vector<double> b{3.4, 3.0, 3.9, 3.2, 3.3};
  const auto r = stats::paired_t_test(a, b);
  CHECK(r.t == doctest::Approx(2.5574480523640273).epsilon(1e-9));
  CHECK(r.df == 4);
  CHECK(r.p_greater == doctest::Approx(0.031403805500350476).epsilon(1e-6));
  const std::vector<double> short_b{1.0};
  CHECK_THROWS(stats::paired_t_test(a, short_b));
}

TEST_CASE("identical samples") {
  const std::vector<double> a{0.5, 0.5, 0.5};
  const auto r = stats::paired_t_test(a, a);
  CHECK(r.mean_diff == 0.0);
  CHECK(r.p_greater >= 0.5);
  const auto ci = stats::bootstrap_paired_ci(a, a, 200, 0.95, 1);
  CHECK(ci.low == 0.0);
  CHECK(ci.high == 0.0);
}

TEST_CASE("bootstrap interval") {
  std::vector<double> a, b;
  for (int i = 0; i < 200; ++i) {
    a.push_back(std::sin(i) * 0.3);
    b.push_back(a.back() + 0.1 + 0.05 * std::cos(3 * i));
  }
  const auto ci = stats::bootstrap_paired_ci(a, b, 1000, 0.95, 3);
  CHECK(ci.contains(stats::mean(b) - stats::mean(a)));
  CHECK(ci.low > 0.09);
  CHECK(ci.high < 0.11);
  const auto again = stats::bootstrap_paired_ci(a, b, 1000, 0.95, 3);
  CHECK(again.low == ci.low);
  CHECK(again.high == ci.high);
}

} // TEST_SUITE
