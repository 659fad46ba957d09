#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "selfadj/ea.hpp"

namespace selfadj {

/// Distribution of the next fitness on ONEMAX from a parent with i ones.
/// pmf[j] = Pr(new fitness = j), j = 0..n.
struct FitnessChangeDistribution {
  int n = 0;
  int i = 0;
  std::vector<double> pmf;

  double total() const;
};

/// One offspring of standard bit mutation: a one-bits lost, b zero-bits gained.
FitnessChangeDistribution single_offspring_distribution(int n, int i);
/// Fitness of the best of lambda independent offspring.
FitnessChangeDistribution best_of_lambda_distribution(int n, int i, std::int64_t lambda);

/// Pr of improvement / no change / fallback, and the conditional mean gain
/// and loss. A conditional mean is empty when its event has probability
/// below 1e-300.
struct LevelQuantities {
  double p_plus = 0.0;
  double p_zero = 0.0;
  double p_minus = 0.0;
  std::optional<double> delta_plus;
  std::optional<double> delta_minus;
};

/// Cached exact tables for one problem size. Each level i keeps the
/// single-offspring pmf and log Pr(offspring <= j); best-of-lambda
/// quantities are derived from those without loss of precision near 1.
/// Lazily filled, so an instance must not be shared between threads.
class OneMaxModel {
 public:
  explicit OneMaxModel(int n);

  int n() const noexcept { return n_; }
  const FitnessChangeDistribution& single(int i);
  FitnessChangeDistribution best_of(int i, std::int64_t lambda);
  LevelQuantities quantities(int i, std::int64_t lambda);

 private:
  struct Level {
    FitnessChangeDistribution dist;
    std::vector<double> log_cdf;  // log Pr(single offspring <= j)
  };
  const Level& level(int i);

  int n_;
  std::vector<std::optional<Level>> levels_;
};

LevelQuantities level_quantities(int n, int i, std::int64_t lambda);

/// One inequality "lhs <= rhs" evaluated at a state.
struct BoundCheck {
  std::string bound;
  int n = 0;
  int i = 0;
  std::int64_t lambda = 1;
  double lhs = 0.0;
  double rhs = 0.0;
  double margin() const { return rhs - lhs; }
  bool pass = true;
};

struct BoundSummary {
  std::string bound;
  std::int64_t checked = 0;
  std::int64_t violations = 0;
  double worst_margin = 0.0;
  int worst_n = 0;
  int worst_i = 0;
  std::int64_t worst_lambda = 0;
};

struct BoundReport {
  std::vector<BoundSummary> summaries;  // one per bound name, fixed order
  std::vector<BoundCheck> rows;         // every check when keep_rows, else violations only
  std::int64_t violations() const;
  bool passed() const { return violations() == 0; }
  const BoundSummary* find(const std::string& bound) const;
};

/// Absolute slack allowed on every bound comparison.
inline constexpr double kBoundTolerance = 1e-12;

/// Names of the inequalities checked by check_bounds, in report order.
const std::vector<std::string>& bound_names();

/// Checks every applicable bound on p+, p-, Delta+ and Delta- for all i in
/// [0, n) and every lambda in `lambdas`. Bounds whose displayed expression is
/// meaningless at a state (a conditional mean that is undefined, a negative
/// base raised to a power) are skipped there.
BoundReport check_bounds(int n, const std::vector<std::int64_t>& lambdas, bool keep_rows = false);
void merge_into(BoundReport& into, const BoundReport& from);

/// sum_{j>=1} (1 - (1 - 1/j!)^lambda).
double forward_drift_series_bound(std::int64_t lambda);

enum class PotentialKind { G1, G2 };

/// g1 = f - (2s/(s+1)) log_F max(e n F^(1/s) / lambda, 1)
/// g2 = f + 2.2 log_F(lambda)^2
struct PotentialSpec {
  PotentialKind kind = PotentialKind::G1;
  double F = 1.5;
  double s = 1.0;
  int n = 1;

  static PotentialSpec g1(double F, double s, int n);
  static PotentialSpec g2(double F);
  /// The lambda-dependent term h.
  double h(double lambda_real) const;
  std::string name() const;
};

double potential_value(const PotentialSpec& spec, double fitness, double lambda_real);

/// Exact: the full fitness gain. CappedGain: improvements count as +1, the
/// quantity the positive-drift argument for g1 actually bounds.
enum class GainMode { Exact, CappedGain };

/// E[g(X_{t+1}) - g(X_t) | fitness i, lambda_real]. The offspring count is
/// round_lambda(lambda_real); h is evaluated at the real-valued lambda.
double exact_potential_drift(OneMaxModel& model, const PotentialSpec& spec, int i, double lambda_real,
                             const ControllerParams& params, GainMode mode = GainMode::Exact);
double exact_potential_drift(const PotentialSpec& spec, int n, int i, double lambda_real,
                             const ControllerParams& params, GainMode mode = GainMode::Exact);

enum class DriftDirection { AtLeast, AtMost };
enum class DriftStatus { Pass, Fail, NoStatesInBand };
std::string_view to_string(DriftStatus status);

struct DriftState {
  int i = 0;
  double lambda_real = 1.0;
};

struct DriftRow {
  int i = 0;
  double lambda_real = 1.0;
  std::int64_t lambda_int = 1;
  double potential = 0.0;
  double drift = 0.0;
  bool pass = true;
};

struct DriftReport {
  DriftStatus status = DriftStatus::NoStatesInBand;
  DriftDirection direction = DriftDirection::AtLeast;
  GainMode mode = GainMode::Exact;
  double threshold = 0.0;
  std::int64_t states = 0;
  std::optional<DriftRow> extreme;  // min drift for AtLeast, max for AtMost
  std::vector<DriftRow> violations;
  std::vector<DriftRow> rows;  // every state when keep_rows
};

DriftReport drift_grid_check(const PotentialSpec& spec, const ControllerParams& params, int n,
                             const std::vector<DriftState>& grid, double threshold, DriftDirection direction,
                             GainMode mode = GainMode::Exact, bool keep_rows = false);

/// i in [0, n) crossed with lambda in {1, 1.25, ..., 10} and 30 log-spaced
/// points from 1 to e n F^(1/s).
std::vector<DriftState> g1_grid(int n, const ControllerParams& params);
/// The band lo < g2 < hi with lo = 0.84n + 2.2 ln(4.5)^2 and hi = 0.85n.
std::pair<double, double> g2_band(int n);
/// States with lambda in {1, 1.05, ..., 2.4} whose g2 value lies strictly
/// inside g2_band(n).
std::vector<DriftState> g2_band_grid(int n, const PotentialSpec& spec);

/// Closed-form upper bound on the expected evaluations of the elitist
/// self-adjusting EA to move from fitness >= a to fitness >= b on ONEMAX.
double elitist_runtime_bound(int n, int a, int b, double F, double s, double lambda0);

}  // namespace selfadj
