#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace selfadj {

/// Linear-interpolation quantile (the common "type 7" rule) of sorted data.
double quantile_sorted(std::span<const double> sorted, double p);

struct Summary {
  std::int64_t count = 0;
  double min = 0.0;
  double q1 = 0.0;
  double median = 0.0;
  double q3 = 0.0;
  double max = 0.0;
  double mean = 0.0;
  double stddev = 0.0;  // sample standard deviation, 0 for a single value
};

/// Five-number summary plus mean; `values` must be non-empty.
Summary summarize(std::vector<double> values);

double mean(std::span<const double> values);

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
};

/// Percentile bootstrap interval for the mean. Deterministic given `seed`.
Interval bootstrap_mean_ci(std::span<const double> values, double level, int resamples, std::uint64_t seed);

}  // namespace selfadj
