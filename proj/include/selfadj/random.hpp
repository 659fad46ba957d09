#pragma once

#include <cstdint>
#include <limits>
#include <random>
#include <vector>

namespace selfadj {

/// SplitMix64 finalizer; a bijection on 64-bit words.
std::uint64_t splitmix64(std::uint64_t x) noexcept;

/// Seed of run `index` in a batch: the (index+1)-th output of a SplitMix64
/// stream started at `master`. Distinct indices give distinct seeds.
std::uint64_t child_seed(std::uint64_t master, std::uint64_t index) noexcept;

/// Reproducible 64-bit generator (mt19937_64, whose output sequence is fixed
/// by the C++ standard). All derived draws are implemented here rather than
/// through <random> distributions so results do not depend on the standard
/// library vendor.
class Rng {
 public:
  using result_type = std::uint64_t;

  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }
  result_type operator()() { return engine_(); }

  /// Uniform on [0, 1) with 53 random bits.
  double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  /// Uniform on {0, ..., bound-1}; bound > 0. Unbiased (Lemire's method).
  std::uint64_t uniform_below(std::uint64_t bound);

  bool bernoulli(double p) { return uniform01() < p; }

 private:
  std::mt19937_64 engine_;
};

/// Inversion sampler for the number of flipped bits in standard bit
/// mutation, Binomial(n, 1/n). The table stops once the cumulative mass
/// rounds to 1, i.e. below the 2^-53 resolution of the uniform draw.
class FlipCountSampler {
 public:
  explicit FlipCountSampler(int n);

  int sample(Rng& rng) const;
  int n() const noexcept { return n_; }

 private:
  int n_;
  std::vector<double> cdf_;
};

}  // namespace selfadj
