#include "selfadj/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

#include <fmt/format.h>

namespace selfadj {

namespace {

constexpr double kTiny = 1e-300;
constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// Binomial(m, p) masses by the ratio recurrence, starting from (1-p)^m.
std::vector<double> binomial_pmf(int m, double p) {
  std::vector<double> out(static_cast<std::size_t>(m + 1), 0.0);
  if (p >= 1.0) {
    out.back() = 1.0;
    return out;
  }
  const double odds = p / (1.0 - p);
  double mass = std::exp(m * std::log1p(-p));
  for (int k = 0; k <= m; ++k) {
    out[static_cast<std::size_t>(k)] = mass;
    mass *= static_cast<double>(m - k) / (k + 1) * odds;
  }
  return out;
}

void check_level(int n, int i) {
  if (n < 1) throw std::invalid_argument(fmt::format("oracle: n must be >= 1, got {}", n));
  if (i < 0 || i > n) throw std::invalid_argument(fmt::format("oracle: level i={} outside [0, {}]", i, n));
}

void check_lambda(std::int64_t lambda) {
  if (lambda < 1) throw std::invalid_argument(fmt::format("oracle: lambda must be >= 1, got {}", lambda));
}

// Pr(best of lambda = j) from log Pr(single <= j) and log Pr(single <= j-1):
// a^lambda - b^lambda = a^lambda (1 - exp(lambda (log b - log a))).
double best_mass(double log_cdf_j, double log_cdf_prev, double lambda) {
  if (log_cdf_j == kNegInf) return 0.0;
  return std::exp(lambda * log_cdf_j) * -std::expm1(lambda * (log_cdf_prev - log_cdf_j));
}

}  // namespace

double FitnessChangeDistribution::total() const {
  double sum = 0.0;
  for (double p : pmf) sum += p;
  return sum;
}

OneMaxModel::OneMaxModel(int n) : n_(n) {
  if (n < 1) throw std::invalid_argument(fmt::format("oracle: n must be >= 1, got {}", n));
  levels_.resize(static_cast<std::size_t>(n + 1));
}

const OneMaxModel::Level& OneMaxModel::level(int i) {
  check_level(n_, i);
  auto& slot = levels_[static_cast<std::size_t>(i)];
  if (slot) return *slot;

  const double p = 1.0 / n_;
  // a of the i one-bits flip to zero, b of the n-i zero-bits flip to one.
  const auto lose = binomial_pmf(i, p);
  const auto gain = binomial_pmf(n_ - i, p);
  Level lv;
  lv.dist.n = n_;
  lv.dist.i = i;
  lv.dist.pmf.assign(static_cast<std::size_t>(n_ + 1), 0.0);
  for (int a = 0; a <= i; ++a) {
    const double pa = lose[static_cast<std::size_t>(a)];
    if (pa == 0.0) continue;
    for (int b = 0; b <= n_ - i; ++b) {
      lv.dist.pmf[static_cast<std::size_t>(i - a + b)] += pa * gain[static_cast<std::size_t>(b)];
    }
  }

  const auto size = lv.dist.pmf.size();
  std::vector<double> cdf(size), sf(size);
  double acc = 0.0;
  for (std::size_t j = 0; j < size; ++j) cdf[j] = (acc += lv.dist.pmf[j]);
  acc = 0.0;
  for (std::size_t j = size; j-- > 0;) {
    sf[j] = acc;  // Pr(single > j)
    acc += lv.dist.pmf[j];
  }
  lv.log_cdf.resize(size);
  for (std::size_t j = 0; j < size; ++j) {
    if (sf[j] < 0.5) {
      lv.log_cdf[j] = std::log1p(-sf[j]);
    } else {
      lv.log_cdf[j] = cdf[j] > 0.0 ? std::log(cdf[j]) : kNegInf;
    }
  }
  slot = std::move(lv);
  return *slot;
}

const FitnessChangeDistribution& OneMaxModel::single(int i) { return level(i).dist; }

FitnessChangeDistribution OneMaxModel::best_of(int i, std::int64_t lambda) {
  check_lambda(lambda);
  const auto& lv = level(i);
  if (lambda == 1) return lv.dist;
  FitnessChangeDistribution out{n_, i, std::vector<double>(lv.dist.pmf.size(), 0.0)};
  const auto lam = static_cast<double>(lambda);
  double prev = kNegInf;
  for (std::size_t j = 0; j < out.pmf.size(); ++j) {
    out.pmf[j] = best_mass(lv.log_cdf[j], prev, lam);
    prev = lv.log_cdf[j];
  }
  return out;
}

LevelQuantities OneMaxModel::quantities(int i, std::int64_t lambda) {
  check_lambda(lambda);
  if (i >= n_) throw std::invalid_argument(fmt::format("oracle: level quantities need i < n, got i={}", i));
  const auto& lv = level(i);
  const auto lam = static_cast<double>(lambda);
  const auto ui = static_cast<std::size_t>(i);
  const double log_below = i > 0 ? lv.log_cdf[ui - 1] : kNegInf;

  LevelQuantities q;
  q.p_minus = i > 0 ? std::exp(lam * log_below) : 0.0;
  q.p_plus = -std::expm1(lam * lv.log_cdf[ui]);
  q.p_zero = best_mass(lv.log_cdf[ui], log_below, lam);

  if (q.p_plus >= kTiny) {
    double sum = 0.0;
    double prev = lv.log_cdf[ui];
    for (std::size_t j = ui + 1; j < lv.log_cdf.size(); ++j) {
      sum += static_cast<double>(j - ui) * best_mass(lv.log_cdf[j], prev, lam);
      prev = lv.log_cdf[j];
    }
    q.delta_plus = sum / q.p_plus;
  }
  if (q.p_minus >= kTiny) {
    // Masses divided by p- directly, so no underflow for large lambda.
    double sum = 0.0;
    double prev = kNegInf;
    for (std::size_t j = 0; j < ui; ++j) {
      const double lj = lv.log_cdf[j];
      if (lj != kNegInf) {
        sum += static_cast<double>(ui - j) * std::exp(lam * (lj - log_below)) * -std::expm1(lam * (prev - lj));
      }
      prev = lj;
    }
    q.delta_minus = sum;
  }
  return q;
}

FitnessChangeDistribution single_offspring_distribution(int n, int i) {
  OneMaxModel model(n);
  return model.single(i);
}

FitnessChangeDistribution best_of_lambda_distribution(int n, int i, std::int64_t lambda) {
  OneMaxModel model(n);
  return model.best_of(i, lambda);
}

LevelQuantities level_quantities(int n, int i, std::int64_t lambda) {
  OneMaxModel model(n);
  return model.quantities(i, lambda);
}

const std::vector<std::string>& bound_names() {
  static const std::vector<std::string> names = {
      "p_plus_lower_chain",   // 1 - en/(en + lambda(n-i)) <= 1 - (1 - (n-i)/(en))^lambda
      "p_plus_lower",         // 1 - (1 - (n-i)/(en))^lambda <= p+
      "p_plus_upper_sharp",   // p+ <= 1 - (1 - 1.14 ((n-i)/n)(1-1/n)^(n-1))^lambda
      "p_plus_upper_chain",   // the 1.14 expression <= 1 - (1 - (n-i)/n)^lambda
      "p_plus_upper",         // p+ <= 1 - (1 - (n-i)/n)^lambda
      "p_plus_single_band",   // n >= 163, 0.84n <= i <= 0.85n: p+_{i,1} <= 0.069
      "p_minus_lower",        // (i/n - 1/e)^lambda <= p-, when i/n >= 1/e
      "p_minus_upper",        // p- <= (1 - (n-i)/(en) - (1-1/n)^n)^lambda
      "p_minus_upper_chain",  // that expression <= ((e-1)/e)^lambda
      "delta_minus_lower",    // 1 <= Delta-
      "delta_minus_upper",    // Delta- <= e/(e-1)
      "delta_plus_lower",     // 1 <= Delta+
      "delta_plus_series",    // Delta+ <= sum_j (1 - (1 - 1/j!)^lambda)
      "delta_plus_log",       // lambda >= 5: Delta+ <= ceil(log2 lambda) + 0.413
  };
  return names;
}

std::int64_t BoundReport::violations() const {
  std::int64_t total = 0;
  for (const auto& s : summaries) total += s.violations;
  return total;
}

const BoundSummary* BoundReport::find(const std::string& bound) const {
  for (const auto& s : summaries) {
    if (s.bound == bound) return &s;
  }
  return nullptr;
}

double forward_drift_series_bound(std::int64_t lambda) {
  check_lambda(lambda);
  const auto lam = static_cast<double>(lambda);
  double sum = 0.0;
  double inv_fact = 1.0;  // 1/j!
  for (int j = 1; j < 200; ++j) {
    inv_fact /= j;
    const double term = inv_fact >= 1.0 ? 1.0 : -std::expm1(lam * std::log1p(-inv_fact));
    sum += term;
    if (term < 1e-18) break;
  }
  return sum;
}

namespace {

class BoundRecorder {
 public:
  BoundRecorder(BoundReport& report, bool keep_rows) : report_(report), keep_rows_(keep_rows) {
    for (const auto& name : bound_names()) report_.summaries.push_back(BoundSummary{name, 0, 0, 0.0, 0, 0, 0});
    first_.assign(report_.summaries.size(), true);
  }

  void check(std::size_t which, int n, int i, std::int64_t lambda, double lhs, double rhs) {
    BoundCheck row{bound_names()[which], n, i, lambda, lhs, rhs, lhs <= rhs + kBoundTolerance};
    auto& s = report_.summaries[which];
    ++s.checked;
    if (!row.pass) ++s.violations;
    const double margin = row.margin();
    if (first_[which] || margin < s.worst_margin) {
      first_[which] = false;
      s.worst_margin = margin;
      s.worst_n = n;
      s.worst_i = i;
      s.worst_lambda = lambda;
    }
    if (keep_rows_ || !row.pass) report_.rows.push_back(std::move(row));
  }

 private:
  BoundReport& report_;
  bool keep_rows_;
  std::vector<bool> first_;
};

// 1 - (1 - q)^lambda without cancellation.
double one_minus_power(double q, double lambda) { return -std::expm1(lambda * std::log1p(-q)); }

}  // namespace

BoundReport check_bounds(int n, const std::vector<std::int64_t>& lambdas, bool keep_rows) {
  if (n < 2) throw std::invalid_argument(fmt::format("bounds check: n must be >= 2, got {}", n));
  BoundReport report;
  BoundRecorder rec(report, keep_rows);
  OneMaxModel model(n);
  const double e = std::numbers::e;
  const double nd = n;
  const double stay_all = std::exp(nd * std::log1p(-1.0 / nd));            // (1-1/n)^n
  const double stay_but_one = std::exp((nd - 1.0) * std::log1p(-1.0 / nd));  // (1-1/n)^(n-1)

  std::vector<double> series(lambdas.size());
  for (std::size_t k = 0; k < lambdas.size(); ++k) series[k] = forward_drift_series_bound(lambdas[k]);

  for (int i = 0; i < n; ++i) {
    const double zeros = nd - i;
    const double c = zeros / (e * nd);
    const double sharp = 1.14 * (zeros / nd) * stay_but_one;
    const double minus_base = 1.0 - c - stay_all;
    const double lower_base = i / nd - 1.0 / e;

    if (n >= 163 && 0.84 * nd <= i && i <= 0.85 * nd) {
      rec.check(5, n, i, 1, model.quantities(i, 1).p_plus, 0.069);
    }

    for (std::size_t k = 0; k < lambdas.size(); ++k) {
      const std::int64_t lambda = lambdas[k];
      const auto lam = static_cast<double>(lambda);
      const auto q = model.quantities(i, lambda);

      const double rational = 1.0 - e * nd / (e * nd + lam * zeros);
      const double power = one_minus_power(c, lam);
      rec.check(0, n, i, lambda, rational, power);
      rec.check(1, n, i, lambda, power, q.p_plus);

      const double upper_sharp = one_minus_power(sharp, lam);
      const double upper_weak = one_minus_power(zeros / nd, lam);
      rec.check(2, n, i, lambda, q.p_plus, upper_sharp);
      rec.check(3, n, i, lambda, upper_sharp, upper_weak);
      rec.check(4, n, i, lambda, q.p_plus, upper_weak);

      if (lower_base >= 0.0) rec.check(6, n, i, lambda, std::pow(lower_base, lam), q.p_minus);
      const double minus_upper = std::pow(minus_base, lam);
      rec.check(7, n, i, lambda, q.p_minus, minus_upper);
      rec.check(8, n, i, lambda, minus_upper, std::pow((e - 1.0) / e, lam));

      if (q.delta_minus) {
        rec.check(9, n, i, lambda, 1.0, *q.delta_minus);
        rec.check(10, n, i, lambda, *q.delta_minus, e / (e - 1.0));
      }
      if (q.delta_plus) {
        rec.check(11, n, i, lambda, 1.0, *q.delta_plus);
        rec.check(12, n, i, lambda, *q.delta_plus, series[k]);
        if (lambda >= 5) rec.check(13, n, i, lambda, *q.delta_plus, std::ceil(std::log2(lam)) + 0.413);
      }
    }
  }
  return report;
}

void merge_into(BoundReport& into, const BoundReport& from) {
  if (into.summaries.empty()) {
    into = from;
    return;
  }
  for (std::size_t k = 0; k < into.summaries.size(); ++k) {
    auto& a = into.summaries[k];
    const auto& b = from.summaries[k];
    if (b.checked > 0 && (a.checked == 0 || b.worst_margin < a.worst_margin)) {
      a.worst_margin = b.worst_margin;
      a.worst_n = b.worst_n;
      a.worst_i = b.worst_i;
      a.worst_lambda = b.worst_lambda;
    }
    a.checked += b.checked;
    a.violations += b.violations;
  }
  into.rows.insert(into.rows.end(), from.rows.begin(), from.rows.end());
}

PotentialSpec PotentialSpec::g1(double F, double s, int n) {
  if (!(F > 1.0) || !(s > 0.0) || n < 1) throw std::invalid_argument("g1 needs F > 1, s > 0, n >= 1");
  return PotentialSpec{PotentialKind::G1, F, s, n};
}

PotentialSpec PotentialSpec::g2(double F) {
  if (!(F > 1.0)) throw std::invalid_argument("g2 needs F > 1");
  return PotentialSpec{PotentialKind::G2, F, 1.0, 1};
}

double PotentialSpec::h(double lambda_real) const {
  const double log_f = std::log(F);
  if (kind == PotentialKind::G2) {
    const double l = std::log(lambda_real) / log_f;
    return 2.2 * l * l;
  }
  const double ratio = std::numbers::e * n * std::pow(F, 1.0 / s) / lambda_real;
  return -(2.0 * s / (s + 1.0)) * std::log(std::max(ratio, 1.0)) / log_f;
}

std::string PotentialSpec::name() const { return kind == PotentialKind::G1 ? "g1" : "g2"; }

double potential_value(const PotentialSpec& spec, double fitness, double lambda_real) {
  return fitness + spec.h(lambda_real);
}

double exact_potential_drift(OneMaxModel& model, const PotentialSpec& spec, int i, double lambda_real,
                             const ControllerParams& params, GainMode mode) {
  const int n = model.n();
  if (i < 0 || i >= n) throw std::invalid_argument(fmt::format("drift: need 0 <= i < n, got i={} n={}", i, n));
  if (!(lambda_real >= 1.0)) throw std::invalid_argument("drift: lambda must be >= 1");
  const auto dist = model.best_of(i, round_lambda(lambda_real));
  const double h_now = spec.h(lambda_real);
  const double h_success = spec.h(update_lambda(lambda_real, true, params));
  const double h_failure = spec.h(update_lambda(lambda_real, false, params));
  double drift = 0.0;
  for (int j = 0; j <= n; ++j) {
    const double p = dist.pmf[static_cast<std::size_t>(j)];
    if (p == 0.0) continue;
    if (j > i) {
      const double gain = mode == GainMode::CappedGain ? 1.0 : static_cast<double>(j - i);
      drift += p * (gain + h_success - h_now);
    } else {
      drift += p * (static_cast<double>(j - i) + h_failure - h_now);
    }
  }
  return drift;
}

double exact_potential_drift(const PotentialSpec& spec, int n, int i, double lambda_real,
                             const ControllerParams& params, GainMode mode) {
  OneMaxModel model(n);
  return exact_potential_drift(model, spec, i, lambda_real, params, mode);
}

std::string_view to_string(DriftStatus status) {
  switch (status) {
    case DriftStatus::Pass: return "pass";
    case DriftStatus::Fail: return "fail";
    case DriftStatus::NoStatesInBand: return "no_states_in_band";
  }
  return "unknown";
}

DriftReport drift_grid_check(const PotentialSpec& spec, const ControllerParams& params, int n,
                             const std::vector<DriftState>& grid, double threshold, DriftDirection direction,
                             GainMode mode, bool keep_rows) {
  DriftReport report;
  report.direction = direction;
  report.mode = mode;
  report.threshold = threshold;
  OneMaxModel model(n);
  for (const auto& st : grid) {
    DriftRow row;
    row.i = st.i;
    row.lambda_real = st.lambda_real;
    row.lambda_int = round_lambda(st.lambda_real);
    row.potential = potential_value(spec, st.i, st.lambda_real);
    row.drift = exact_potential_drift(model, spec, st.i, st.lambda_real, params, mode);
    row.pass = direction == DriftDirection::AtLeast ? row.drift >= threshold : row.drift <= threshold;
    ++report.states;
    const bool more_extreme = !report.extreme || (direction == DriftDirection::AtLeast
                                                      ? row.drift < report.extreme->drift
                                                      : row.drift > report.extreme->drift);
    if (more_extreme) report.extreme = row;
    if (!row.pass) report.violations.push_back(row);
    if (keep_rows) report.rows.push_back(row);
  }
  if (report.states == 0) {
    report.status = DriftStatus::NoStatesInBand;
  } else {
    report.status = report.violations.empty() ? DriftStatus::Pass : DriftStatus::Fail;
  }
  return report;
}

std::vector<DriftState> g1_grid(int n, const ControllerParams& params) {
  std::vector<double> lambdas;
  for (int k = 0; k <= 36; ++k) lambdas.push_back(1.0 + 0.25 * k);
  const double top = std::log(std::numbers::e * n * params.growth_factor);
  constexpr int kLogPoints = 30;
  for (int k = 0; k < kLogPoints; ++k) lambdas.push_back(std::exp(top * k / (kLogPoints - 1)));
  std::sort(lambdas.begin(), lambdas.end());
  lambdas.erase(std::unique(lambdas.begin(), lambdas.end()), lambdas.end());

  std::vector<DriftState> grid;
  grid.reserve(static_cast<std::size_t>(n) * lambdas.size());
  for (int i = 0; i < n; ++i) {
    for (double l : lambdas) grid.push_back({i, l});
  }
  return grid;
}

std::pair<double, double> g2_band(int n) {
  const double l = std::log(4.5);
  return {0.84 * n + 2.2 * l * l, 0.85 * n};
}

std::vector<DriftState> g2_band_grid(int n, const PotentialSpec& spec) {
  const auto [lo, hi] = g2_band(n);
  std::vector<DriftState> grid;
  for (int i = 0; i < n; ++i) {
    for (int k = 0; k <= 28; ++k) {
      const double l = 1.0 + 0.05 * k;
      const double g = potential_value(spec, i, l);
      if (lo < g && g < hi) grid.push_back({i, l});
    }
  }
  return grid;
}

double elitist_runtime_bound(int n, int a, int b, double F, double s, double lambda0) {
  if (n < 1 || a < 0 || a > b || b > n) {
    throw std::invalid_argument(fmt::format("bound: need 0 <= a <= b <= n, got a={} b={} n={}", a, b, n));
  }
  if (!(F > 1.0) || !(s > 0.0) || !(lambda0 >= 1.0)) {
    throw std::invalid_argument("bound: need F > 1, s > 0, lambda0 >= 1");
  }
  const double e = std::numbers::e;
  double levels = 0.0;
  for (int i = a; i < b; ++i) levels += e * n / static_cast<double>(n - i);
  const double growth = std::pow(F, 1.0 / s);
  const double per_level = 1.0 / e + (1.0 - 1.0 / growth) / std::log(growth);
  return lambda0 * F / (F - 1.0) + per_level * (F * growth - 1.0) / (F - 1.0) * levels;
}

}  // namespace selfadj
