#include "riarit/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include <boost/math/distributions/students_t.hpp>

#include "riarit/rng.hpp"

namespace riarit::stats {

double mean(std::span<const double> xs) {
  if (xs.empty()) {
    return 0.0;
  }
  double s = 0.0;
  for (double x : xs) {
    s += x;
  }
  return s / static_cast<double>(xs.size());
}

double variance(std::span<const double> xs) {
  if (xs.size() < 2) {
    return 0.0;
  }
  const double m = mean(xs);
  double s = 0.0;
  for (double x : xs) {
    s += (x - m) * (x - m);
  }
  return s / static_cast<double>(xs.size() - 1);
}

double quantile(std::vector<double> xs, double q) {
  if (xs.empty()) {
    throw std::invalid_argument("quantile of empty data");
  }
  std::sort(xs.begin(), xs.end());
  const double pos = q * static_cast<double>(xs.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, xs.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  if (xs[lo] == xs[hi]) {
    return xs[lo];
  }
  return xs[lo] + frac * (xs[hi] - xs[lo]);
}

FiveNumber five_number(std::vector<double> xs) {
  std::sort(xs.begin(), xs.end());
  return {xs.front(), quantile(xs, 0.25), quantile(xs, 0.5), quantile(xs, 0.75), xs.back()};
}

namespace {

TestResult finish(double diff, double se, double df) {
  TestResult r;
  r.mean_diff = diff;
  r.df = df;
  if (!(se > 0.0) || !(df > 0.0)) {
    // Degenerate: no spread. The direction is certain unless the difference is 0.
    r.t = diff == 0.0 ? 0.0 : std::copysign(std::numeric_limits<double>::infinity(), diff);
    r.p_greater = diff > 0.0 ? 0.0 : 1.0;
    r.p_less = diff < 0.0 ? 0.0 : 1.0;
    if (diff == 0.0) {
      r.p_greater = r.p_less = 0.5;
    }
    return r;
  }
  r.t = diff / se;
  const boost::math::students_t dist(df);
  r.p_greater = boost::math::cdf(boost::math::complement(dist, r.t));
  r.p_less = boost::math::cdf(dist, r.t);
  return r;
}

} // namespace

TestResult paired_t_test(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size() || a.empty()) {
    throw std::invalid_argument("paired test needs equal, non-empty samples");
  }
  std::vector<double> d(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    d[i] = b[i] - a[i];
  }
  const double n = static_cast<double>(d.size());
  return finish(mean(d), std::sqrt(variance(d) / n), n - 1.0);
}

TestResult welch_t_test(std::span<const double> a, std::span<const double> b) {
  if (a.size() < 2 || b.size() < 2) {
    throw std::invalid_argument("Welch test needs at least two observations per sample");
  }
  const double na = static_cast<double>(a.size());
  const double nb = static_cast<double>(b.size());
  const double va = variance(a) / na;
  const double vb = variance(b) / nb;
  const double se = std::sqrt(va + vb);
  const double df_den = va * va / (na - 1.0) + vb * vb / (nb - 1.0);
  const double df = df_den > 0.0 ? (va + vb) * (va + vb) / df_den : 0.0;
  return finish(mean(b) - mean(a), se, df);
}

Interval bootstrap_paired_ci(std::span<const double> a, std::span<const double> b,
                             int resamples, double level, std::uint64_t seed) {
  if (a.size() != b.size() || a.empty()) {
    throw std::invalid_argument("bootstrap needs equal, non-empty samples");
  }
  std::vector<double> d(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    d[i] = b[i] - a[i];
  }
  Rng rng(seed);
  std::vector<double> means;
  means.reserve(static_cast<std::size_t>(resamples));
  for (int r = 0; r < resamples; ++r) {
    double s = 0.0;
    for (std::size_t k = 0; k < d.size(); ++k) {
      s += d[rng.below(d.size())];
    }
    means.push_back(s / static_cast<double>(d.size()));
  }
  const double tail = (1.0 - level) / 2.0;
  return {quantile(means, tail), quantile(means, 1.0 - tail)};
}

} // namespace riarit::stats
