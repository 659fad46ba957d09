#include "selfadj/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "selfadj/random.hpp"

namespace selfadj {

double quantile_sorted(std::span<const double> sorted, double p) {
  if (sorted.empty()) throw std::invalid_argument("quantile of empty data");
  if (p <= 0.0) return sorted.front();
  if (p >= 1.0) return sorted.back();
  const double h = (static_cast<double>(sorted.size()) - 1.0) * p;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const auto hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

double mean(std::span<const double> values) {
  if (values.empty()) throw std::invalid_argument("mean of empty data");
  return std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
}

Summary summarize(std::vector<double> values) {
  if (values.empty()) throw std::invalid_argument("summary of empty data");
  std::sort(values.begin(), values.end());
  Summary s;
  s.count = static_cast<std::int64_t>(values.size());
  s.min = values.front();
  s.max = values.back();
  s.q1 = quantile_sorted(values, 0.25);
  s.median = quantile_sorted(values, 0.5);
  s.q3 = quantile_sorted(values, 0.75);
  s.mean = mean(values);
  if (values.size() > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - s.mean) * (v - s.mean);
    s.stddev = std::sqrt(ss / static_cast<double>(values.size() - 1));
  }
  return s;
}

Interval bootstrap_mean_ci(std::span<const double> values, double level, int resamples, std::uint64_t seed) {
  if (values.empty()) throw std::invalid_argument("bootstrap of empty data");
  if (!(level > 0.0 && level < 1.0)) throw std::invalid_argument("bootstrap level must be in (0, 1)");
  if (resamples < 1) throw std::invalid_argument("bootstrap needs at least one resample");
  Rng rng(seed);
  const auto m = static_cast<std::uint64_t>(values.size());
  std::vector<double> means(static_cast<std::size_t>(resamples));
  for (auto& out : means) {
    double sum = 0.0;
    for (std::uint64_t k = 0; k < m; ++k) sum += values[rng.uniform_below(m)];
    out = sum / static_cast<double>(m);
  }
  std::sort(means.begin(), means.end());
  const double tail = (1.0 - level) / 2.0;
  return {quantile_sorted(means, tail), quantile_sorted(means, 1.0 - tail)};
}

}  // namespace selfadj
