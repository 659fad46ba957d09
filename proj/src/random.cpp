#include "selfadj/random.hpp"

#include <cmath>
#include <stdexcept>

namespace selfadj {

std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

std::uint64_t child_seed(std::uint64_t master, std::uint64_t index) noexcept {
  return splitmix64(master + index * 0x9E3779B97F4A7C15ULL);
}

namespace {
__extension__ typedef unsigned __int128 u128;
}  // namespace

std::uint64_t Rng::uniform_below(std::uint64_t bound) {
  if (bound == 0) throw std::invalid_argument("uniform_below: bound must be positive");
  u128 m = static_cast<u128>(engine_()) * bound;
  auto low = static_cast<std::uint64_t>(m);
  if (low < bound) {
    const std::uint64_t threshold = (0 - bound) % bound;
    while (low < threshold) {
      m = static_cast<u128>(engine_()) * bound;
      low = static_cast<std::uint64_t>(m);
    }
  }
  return static_cast<std::uint64_t>(m >> 64);
}

FlipCountSampler::FlipCountSampler(int n) : n_(n) {
  if (n < 1) throw std::invalid_argument("FlipCountSampler: n must be >= 1");
  if (n == 1) {
    cdf_ = {0.0, 1.0};
    return;
  }
  const double p = 1.0 / n;
  const double odds = p / (1.0 - p);
  // P(K = 0) = (1 - 1/n)^n, then the ratio recurrence of the binomial pmf.
  double mass = std::exp(n * std::log1p(-p));
  double cum = mass;
  cdf_.push_back(cum);
  for (int k = 0; k < n && 1.0 - cum >= 0x1.0p-60; ++k) {
    mass *= static_cast<double>(n - k) / (k + 1) * odds;
    cum += mass;
    cdf_.push_back(cum);
  }
  cdf_.back() = 1.0;
}

int FlipCountSampler::sample(Rng& rng) const {
  const double u = rng.uniform01();
  int k = 0;
  while (u >= cdf_[static_cast<std::size_t>(k)]) ++k;
  return k;
}

}  // namespace selfadj
