#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "selfadj/fitness.hpp"
#include "selfadj/random.hpp"

namespace selfadj {

/// Update strength F > 1 and success rate s > 0 of the success-based rule:
/// a success divides lambda by F, a failure multiplies it by F^(1/s).
struct ControllerParams {
  double F = 1.5;
  double s = 1.0;
  double growth_factor = 1.5;  // F^(1/s)
  double shrink_factor = 1.0 / 1.5;  // 1/F

  static ControllerParams make(double F, double s);
};

/// Nearest integer, halves rounded up (1.5 -> 2, 2.49 -> 2).
std::int64_t round_lambda(double lambda_real);

/// success: max(1, lambda/F); failure: lambda * F^(1/s). No upper clamp.
double update_lambda(double lambda_real, bool success, const ControllerParams& params);

enum class AlgorithmKind { SelfAdjustingComma, SelfAdjustingPlus, StaticComma };

struct Algorithm {
  AlgorithmKind kind = AlgorithmKind::SelfAdjustingComma;
  int static_lambda = 0;  // StaticComma only, >= 1

  static Algorithm comma() { return {AlgorithmKind::SelfAdjustingComma, 0}; }
  static Algorithm plus() { return {AlgorithmKind::SelfAdjustingPlus, 0}; }
  static Algorithm static_comma(int lambda);

  /// "comma", "plus" or "static" (static needs a lambda supplied separately).
  static AlgorithmKind parse_kind(std::string_view name);
  std::string name() const;
};

/// ceil(log_{e/(e-1)} n), the static (1,lambda) EA baseline; at least 1.
int default_static_lambda(int n);

struct StoppingCondition {
  std::optional<std::int64_t> max_generations;
  std::optional<std::int64_t> max_evaluations;
  bool stop_on_optimum = true;
  /// Defaults to default_abort_threshold() when unset.
  std::optional<double> lambda_abort_threshold;

  /// e * F^(1/s) * n^3 * F^(1/s): one growth step past the point lambda
  /// reaches before the optimum only with probability exp(-Omega(n^2)).
  static double default_abort_threshold(int n, const ControllerParams& params);
  void validate() const;
};

struct AlgoState {
  SearchPoint x;
  Fitness fitness = 0;
  double lambda = 1.0;
  std::int64_t generation = 0;
  std::int64_t evaluations = 0;
  Fitness best_so_far = 0;

  static AlgoState initial(SearchPoint x, const FitnessFunction& f, double lambda0);
};

/// Outcome of one generation, reported alongside the updated state.
struct StepOutcome {
  std::int64_t lambda_int = 0;
  Fitness offspring_best = 0;
  bool success = false;  // strict improvement over the parent
};

/// Standard bit mutation: the flip count is drawn from Binomial(n, 1/n) and
/// the positions uniformly without replacement, which is distributed exactly
/// like flipping every bit independently with probability 1/n.
class Mutator {
 public:
  explicit Mutator(int n);

  int n() const noexcept { return sampler_.n(); }
  /// Writes distinct flip positions into `positions` (cleared first).
  void sample_flips(Rng& rng, std::vector<int>& positions) const;
  SearchPoint mutate(const SearchPoint& x, Rng& rng) const;

 private:
  FlipCountSampler sampler_;
};

SearchPoint mutate(const SearchPoint& x, Rng& rng);
/// Per-bit reference implementation, used to cross-check Mutator.
SearchPoint mutate_per_bit(const SearchPoint& x, Rng& rng);

/// Generation of the self-adjusting (1,lambda) EA: the best offspring
/// (ties broken uniformly) always replaces the parent.
StepOutcome generation_comma(AlgoState& state, const FitnessFunction& f, const ControllerParams& params,
                             const Mutator& mutator, Rng& rng);
/// Elitist variant: the best offspring replaces the parent only if it is at
/// least as fit. Success is still a strict improvement.
StepOutcome generation_plus(AlgoState& state, const FitnessFunction& f, const ControllerParams& params,
                            const Mutator& mutator, Rng& rng);
/// (1,lambda) EA with a constant offspring population size.
StepOutcome generation_static(AlgoState& state, const FitnessFunction& f, int lambda, const Mutator& mutator,
                              Rng& rng);

enum class StopCause { Optimum, GenerationCap, EvaluationCap, LambdaAbort };
std::string_view to_string(StopCause cause);

/// Summary: counters only. Levels: adds per-fitness aggregates and ratchet
/// counters (constant memory per run). Full: adds one row per generation.
enum class TraceLevel { Summary, Levels, Full };
TraceLevel parse_trace_level(std::string_view name);
std::string_view to_string(TraceLevel level);

/// State after `generation` generations. lambda_int is the offspring count
/// the next generation would use.
struct TraceRow {
  std::int64_t generation = 0;
  Fitness fitness = 0;
  double lambda_real = 1.0;
  std::int64_t lambda_int = 1;
  std::int64_t evaluations = 0;
  Fitness best_so_far = 0;
};

/// Per scaled-fitness-value aggregates of one run. Index v is a scaled
/// Fitness in [0, optimum].
struct LevelProfile {
  /// Generations executed from a parent with fitness v.
  std::vector<std::int64_t> generations;
  /// Offspring evaluated in those generations (sum of lambda_int).
  std::vector<std::int64_t> evaluations;
  /// Evaluation counter after the first generation whose parent fitness
  /// reached >= v; 0 if x_0 already had it, -1 if never reached.
  std::vector<std::int64_t> first_reach;

  explicit LevelProfile(Fitness max_value = 0);
};

/// Monitors for the two ratchet statements: fitness drops in generations
/// with lambda_int >= 4 log2 n, and the gap best_so_far - f(x_t).
struct RatchetCounters {
  double lambda_threshold = 0.0;  // 4 log2 n
  std::int64_t eligible_generations = 0;
  std::int64_t drops = 0;
  /// gap (scaled) -> number of states x_t, t = 0..T, with that gap.
  std::map<Fitness, std::int64_t> gap_histogram;

  /// States with f(x_t) < best_so_far_t - r log2 n (gap in scaled units).
  std::int64_t gap_violations(double r, int n, int scale) const;
};

struct RunRecord {
  std::uint64_t run_id = 0;
  std::uint64_t seed = 0;
  StopCause stop_cause = StopCause::GenerationCap;
  std::int64_t generations = 0;
  std::int64_t evaluations = 0;
  Fitness initial_fitness = 0;
  Fitness final_fitness = 0;
  Fitness best_so_far = 0;
  double final_lambda = 1.0;
  std::vector<TraceRow> rows;                 // TraceLevel::Full
  std::optional<LevelProfile> levels;         // Levels and Full
  std::optional<RatchetCounters> ratchet;     // Levels and Full

  bool censored() const noexcept { return stop_cause != StopCause::Optimum; }
};

struct RunSpec {
  Algorithm algorithm;
  ControllerParams params;
  StoppingCondition stop;
  TraceLevel trace = TraceLevel::Summary;
  double initial_lambda = 1.0;
};

/// Runs from a uniformly random x_0 with lambda = spec.initial_lambda.
RunRecord run(const RunSpec& spec, const FitnessFunction& f, std::uint64_t seed);
/// Runs from a given initial state; `rng` continues to drive all draws.
RunRecord run_from(AlgoState state, const RunSpec& spec, const FitnessFunction& f, Rng& rng);

}  // namespace selfadj
