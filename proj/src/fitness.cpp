#include "selfadj/fitness.hpp"

#include <algorithm>
#include <charconv>
#include <stdexcept>

#include <fmt/format.h>

namespace selfadj {

SearchPoint::SearchPoint(int n) {
  if (n < 0) throw std::invalid_argument("SearchPoint: negative length");
  bits_.assign(static_cast<std::size_t>(n), 0);
}

SearchPoint::SearchPoint(std::vector<std::uint8_t> bits) : bits_(std::move(bits)) {
  for (auto& b : bits_) {
    b = b != 0 ? 1 : 0;
    ones_ += b;
  }
}

SearchPoint SearchPoint::from_string(std::string_view bits) {
  std::vector<std::uint8_t> v;
  v.reserve(bits.size());
  for (char c : bits) {
    if (c != '0' && c != '1') {
      throw std::invalid_argument(fmt::format("SearchPoint: invalid bit character '{}'", c));
    }
    v.push_back(c == '1' ? 1 : 0);
  }
  return SearchPoint(std::move(v));
}

void SearchPoint::flip(int i) noexcept {
  auto& b = bits_[static_cast<std::size_t>(i)];
  ones_ += b != 0 ? -1 : 1;
  b ^= 1;
}

void SearchPoint::set(int i, bool value) noexcept {
  if ((*this)[i] != value) flip(i);
}

std::string SearchPoint::to_string() const {
  std::string s(bits_.size(), '0');
  for (std::size_t i = 0; i < bits_.size(); ++i) {
    if (bits_[i] != 0) s[i] = '1';
  }
  return s;
}

int one_max(const SearchPoint& x) { return x.ones(); }

int zero_max(const SearchPoint& x) { return x.zeros(); }

int two_max(const SearchPoint& x) { return std::max(x.ones(), x.zeros()); }

namespace {

int jump_from_ones(int n, int k, int ones) {
  if (n - k < ones && ones < n) return n - ones;
  return k + ones;
}

Fitness cliff_doubled_from_ones(int d, int ones) {
  if (ones <= d) return 2 * static_cast<Fitness>(ones);
  return 2 * static_cast<Fitness>(ones - d) + 1;
}

}  // namespace

int jump(const SearchPoint& x, int k) { return jump_from_ones(x.size(), k, x.ones()); }

Fitness cliff_doubled(const SearchPoint& x, int d) { return cliff_doubled_from_ones(d, x.ones()); }

double cliff(const SearchPoint& x, int d) { return static_cast<double>(cliff_doubled(x, d)) / 2.0; }

bool on_ridge(const SearchPoint& x) {
  // 1^i 0^(n-i) holds exactly when the first |x|_1 positions are all ones.
  const auto bits = x.bits();
  return std::all_of(bits.begin(), bits.begin() + x.ones(), [](std::uint8_t b) { return b != 0; });
}

int ridge(const SearchPoint& x) { return on_ridge(x) ? x.size() + x.ones() : x.zeros(); }

FitnessFunction::FitnessFunction(FunctionKind kind, int n, int parameter)
    : kind_(kind), n_(n), parameter_(parameter) {
  if (n < 1) throw std::invalid_argument(fmt::format("fitness: n must be >= 1, got {}", n));
  if (kind == FunctionKind::Jump && (parameter < 1 || parameter >= n)) {
    throw std::invalid_argument(fmt::format("jump: k must satisfy 1 <= k < n, got k={} n={}", parameter, n));
  }
  if (kind == FunctionKind::Cliff && (parameter < 1 || parameter >= n)) {
    throw std::invalid_argument(fmt::format("cliff: d must satisfy 1 <= d < n, got d={} n={}", parameter, n));
  }
  if (kind != FunctionKind::Jump && kind != FunctionKind::Cliff) parameter_ = 0;

  if (kind == FunctionKind::Ridge) {
    optimum_ = 2 * static_cast<Fitness>(n);
  } else {
    // Largest value over all one-counts; attained at 1^n (0^n for ZeroMax)
    // for every parameter in the intended regime.
    Fitness best = 0;
    for (int ones = 0; ones <= n; ++ones) best = std::max(best, evaluate_ones(ones));
    optimum_ = best;
  }
}

FitnessFunction FitnessFunction::make(FunctionKind kind, int n, int parameter) {
  return FitnessFunction(kind, n, parameter);
}

FitnessFunction FitnessFunction::parse(std::string_view name, int n) {
  const auto colon = name.find(':');
  const std::string_view head = name.substr(0, colon);
  int param = 0;
  if (colon != std::string_view::npos) {
    const std::string_view tail = name.substr(colon + 1);
    const auto [ptr, ec] = std::from_chars(tail.data(), tail.data() + tail.size(), param);
    if (ec != std::errc{} || ptr != tail.data() + tail.size()) {
      throw std::invalid_argument(fmt::format("fitness: bad parameter in '{}'", name));
    }
  }
  const bool has_param = colon != std::string_view::npos;
  auto plain = [&](FunctionKind k) {
    if (has_param) throw std::invalid_argument(fmt::format("fitness: '{}' takes no parameter", head));
    return FitnessFunction(k, n, 0);
  };
  auto with_param = [&](FunctionKind k) {
    if (!has_param) throw std::invalid_argument(fmt::format("fitness: '{}' needs a parameter, e.g. {}:3", head, head));
    return FitnessFunction(k, n, param);
  };
  if (head == "onemax") return plain(FunctionKind::OneMax);
  if (head == "zeromax") return plain(FunctionKind::ZeroMax);
  if (head == "twomax") return plain(FunctionKind::TwoMax);
  if (head == "ridge") return plain(FunctionKind::Ridge);
  if (head == "jump") return with_param(FunctionKind::Jump);
  if (head == "cliff") return with_param(FunctionKind::Cliff);
  throw std::invalid_argument(fmt::format("fitness: unknown function '{}'", name));
}

std::string FitnessFunction::name() const {
  switch (kind_) {
    case FunctionKind::OneMax: return "onemax";
    case FunctionKind::ZeroMax: return "zeromax";
    case FunctionKind::TwoMax: return "twomax";
    case FunctionKind::Jump: return fmt::format("jump:{}", parameter_);
    case FunctionKind::Cliff: return fmt::format("cliff:{}", parameter_);
    case FunctionKind::Ridge: return "ridge";
  }
  return "unknown";
}

Fitness FitnessFunction::evaluate_ones(int ones) const {
  switch (kind_) {
    case FunctionKind::OneMax: return ones;
    case FunctionKind::ZeroMax: return n_ - ones;
    case FunctionKind::TwoMax: return std::max(ones, n_ - ones);
    case FunctionKind::Jump: return jump_from_ones(n_, parameter_, ones);
    case FunctionKind::Cliff: return cliff_doubled_from_ones(parameter_, ones);
    case FunctionKind::Ridge: break;
  }
  throw std::logic_error("evaluate_ones: ridge depends on the bit pattern");
}

Fitness FitnessFunction::evaluate(const SearchPoint& x) const {
  if (kind_ == FunctionKind::Ridge) return ridge(x);
  return evaluate_ones(x.ones());
}

}  // namespace selfadj
