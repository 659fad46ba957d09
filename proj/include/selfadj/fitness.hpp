#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace selfadj {

/// Fitness on an exact integer scale. Cliff stores twice its value so the
/// half-integer offset compares without rounding; all other functions use
/// scale 1.
using Fitness = std::int64_t;

/// Fixed-length bit string with a cached count of one-bits.
class SearchPoint {
 public:
  explicit SearchPoint(int n);
  explicit SearchPoint(std::vector<std::uint8_t> bits);

  /// Parses a string of '0'/'1' characters, e.g. "10110".
  static SearchPoint from_string(std::string_view bits);

  int size() const noexcept { return static_cast<int>(bits_.size()); }
  int ones() const noexcept { return ones_; }
  int zeros() const noexcept { return size() - ones_; }

  bool operator[](int i) const noexcept { return bits_[static_cast<std::size_t>(i)] != 0; }
  void flip(int i) noexcept;
  void set(int i, bool value) noexcept;

  std::span<const std::uint8_t> bits() const noexcept { return bits_; }
  std::string to_string() const;

  bool operator==(const SearchPoint&) const = default;

 private:
  std::vector<std::uint8_t> bits_;
  int ones_ = 0;
};

int one_max(const SearchPoint& x);
int zero_max(const SearchPoint& x);
int two_max(const SearchPoint& x);
int jump(const SearchPoint& x, int k);
double cliff(const SearchPoint& x, int d);
/// Cliff value times two; exact.
Fitness cliff_doubled(const SearchPoint& x, int d);
/// True iff x = 1^i 0^(n-i) for some i in {0..n}.
bool on_ridge(const SearchPoint& x);
int ridge(const SearchPoint& x);

enum class FunctionKind { OneMax, ZeroMax, TwoMax, Jump, Cliff, Ridge };

/// One of the six benchmark functions bound to a problem size.
///
/// Names accepted by parse(): "onemax", "zeromax", "twomax", "jump:k",
/// "cliff:d", "ridge".
class FitnessFunction {
 public:
  static FitnessFunction make(FunctionKind kind, int n, int parameter = 0);
  static FitnessFunction parse(std::string_view name, int n);

  FunctionKind kind() const noexcept { return kind_; }
  int n() const noexcept { return n_; }
  /// k for Jump, d for Cliff, 0 otherwise.
  int parameter() const noexcept { return parameter_; }
  /// Divisor turning a scaled Fitness into the function's real value.
  int scale() const noexcept { return kind_ == FunctionKind::Cliff ? 2 : 1; }
  std::string name() const;

  Fitness evaluate(const SearchPoint& x) const;

  /// Every kind except Ridge is a function of |x|_1 alone.
  bool depends_only_on_ones() const noexcept { return kind_ != FunctionKind::Ridge; }
  Fitness evaluate_ones(int ones) const;

  Fitness optimum() const noexcept { return optimum_; }
  bool is_optimum(Fitness f) const noexcept { return f >= optimum_; }
  double to_value(Fitness f) const noexcept { return static_cast<double>(f) / scale(); }

 private:
  FitnessFunction(FunctionKind kind, int n, int parameter);

  FunctionKind kind_;
  int n_;
  int parameter_;
  Fitness optimum_ = 0;
};

}  // namespace selfadj
