#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace riarit::stats {

double mean(std::span<const double> xs);
double variance(std::span<const double> xs);  // sample variance (n-1)

/// Linear-interpolation quantile (type 7) of unsorted data, q in [0,1].
double quantile(std::vector<double> xs, double q);

struct FiveNumber {
  double min = 0, q1 = 0, median = 0, q3 = 0, max = 0;
};
FiveNumber five_number(std::vector<double> xs);

struct TestResult {
  double mean_diff = 0.0;  // mean(b) - mean(a)
  double t = 0.0;
  double df = 0.0;
  /// One-sided p-value for the alternative mean(b) > mean(a).
  double p_greater = 1.0;
  /// One-sided p-value for the alternative mean(b) < mean(a).
  double p_less = 1.0;
};

/// Paired t-test on b - a; sizes must match.
TestResult paired_t_test(std::span<const double> a, std::span<const double> b);

/// Welch's unequal-variance t-test.
TestResult welch_t_test(std::span<const double> a, std::span<const double> b);

struct Interval {
  double low = 0.0;
  double high = 0.0;
  bool contains(double x) const { return low <= x && x <= high; }
};

/// Percentile bootstrap CI of mean(b - a) over paired units.
Interval bootstrap_paired_ci(std::span<const double> a, std::span<const double> b,
                             int resamples, double level, std::uint64_t seed);

} // namespace riarit::stats
