#include "selfadj/ea.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

#include <fmt/format.h>

namespace selfadj {

ControllerParams ControllerParams::make(double F, double s) {
  if (!(F > 1.0) || !std::isfinite(F)) throw std::invalid_argument(fmt::format("F must be > 1, got {}", F));
  if (!(s > 0.0) || !std::isfinite(s)) throw std::invalid_argument(fmt::format("s must be > 0, got {}", s));
  return ControllerParams{F, s, std::pow(F, 1.0 / s), 1.0 / F};
}

std::int64_t round_lambda(double lambda_real) {
  return static_cast<std::int64_t>(std::floor(lambda_real + 0.5));
}

double update_lambda(double lambda_real, bool success, const ControllerParams& params) {
  if (success) return std::max(1.0, lambda_real * params.shrink_factor);
  return lambda_real * params.growth_factor;
}

Algorithm Algorithm::static_comma(int lambda) {
  if (lambda < 1) throw std::invalid_argument(fmt::format("static lambda must be >= 1, got {}", lambda));
  return {AlgorithmKind::StaticComma, lambda};
}

AlgorithmKind Algorithm::parse_kind(std::string_view name) {
  if (name == "comma") return AlgorithmKind::SelfAdjustingComma;
  if (name == "plus") return AlgorithmKind::SelfAdjustingPlus;
  if (name == "static") return AlgorithmKind::StaticComma;
  throw std::invalid_argument(fmt::format("unknown algorithm '{}' (expected comma, plus or static)", name));
}

std::string Algorithm::name() const {
  switch (kind) {
    case AlgorithmKind::SelfAdjustingComma: return "comma";
    case AlgorithmKind::SelfAdjustingPlus: return "plus";
    case AlgorithmKind::StaticComma: return fmt::format("static:{}", static_lambda);
  }
  return "unknown";
}

int default_static_lambda(int n) {
  if (n <= 1) return 1;
  const double base = std::numbers::e / (std::numbers::e - 1.0);
  return std::max(1, static_cast<int>(std::ceil(std::log(n) / std::log(base))));
}

double StoppingCondition::default_abort_threshold(int n, const ControllerParams& params) {
  const double cube = static_cast<double>(n) * n * n;
  return std::numbers::e * params.growth_factor * cube * params.growth_factor;
}

void StoppingCondition::validate() const {
  if (!stop_on_optimum && !max_generations && !max_evaluations) {
    throw std::invalid_argument("stopping condition: enable the optimum stop or set a generation/evaluation cap");
  }
  if (max_generations && *max_generations < 0) throw std::invalid_argument("max_generations must be >= 0");
  if (max_evaluations && *max_evaluations < 0) throw std::invalid_argument("max_evaluations must be >= 0");
  if (lambda_abort_threshold && !(*lambda_abort_threshold >= 1.0)) {
    throw std::invalid_argument("lambda_abort_threshold must be >= 1");
  }
}

AlgoState AlgoState::initial(SearchPoint x, const FitnessFunction& f, double lambda0) {
  if (x.size() != f.n()) throw std::invalid_argument("initial state: length does not match the fitness function");
  if (!(lambda0 >= 1.0)) throw std::invalid_argument(fmt::format("initial lambda must be >= 1, got {}", lambda0));
  const Fitness fx = f.evaluate(x);
  return AlgoState{std::move(x), fx, lambda0, 0, 0, fx};
}

Mutator::Mutator(int n) : sampler_(n) {}

void Mutator::sample_flips(Rng& rng, std::vector<int>& positions) const {
  positions.clear();
  const int n = sampler_.n();
  const int k = sampler_.sample(rng);
  if (k == 0) return;
  if (2 * k > n) {
    // Dense case (small n): partial Fisher-Yates over all indices.
    std::vector<int> idx(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) idx[static_cast<std::size_t>(i)] = i;
    for (int i = 0; i < k; ++i) {
      const auto j = i + static_cast<int>(rng.uniform_below(static_cast<std::uint64_t>(n - i)));
      std::swap(idx[static_cast<std::size_t>(i)], idx[static_cast<std::size_t>(j)]);
      positions.push_back(idx[static_cast<std::size_t>(i)]);
    }
    return;
  }
  while (static_cast<int>(positions.size()) < k) {
    const auto p = static_cast<int>(rng.uniform_below(static_cast<std::uint64_t>(n)));
    if (std::find(positions.begin(), positions.end(), p) == positions.end()) positions.push_back(p);
  }
}

SearchPoint Mutator::mutate(const SearchPoint& x, Rng& rng) const {
  std::vector<int> flips;
  sample_flips(rng, flips);
  SearchPoint y = x;
  for (int p : flips) y.flip(p);
  return y;
}

SearchPoint mutate(const SearchPoint& x, Rng& rng) { return Mutator(x.size()).mutate(x, rng); }

SearchPoint mutate_per_bit(const SearchPoint& x, Rng& rng) {
  SearchPoint y = x;
  const double p = 1.0 / x.size();
  for (int i = 0; i < x.size(); ++i) {
    if (rng.bernoulli(p)) y.flip(i);
  }
  return y;
}

namespace {

enum class Replacement { Always, IfNotWorse };

StepOutcome generation_core(AlgoState& state, const FitnessFunction& f, std::int64_t lambda_int,
                            Replacement rule, const Mutator& mutator, Rng& rng) {
  thread_local std::vector<int> flips;
  thread_local std::vector<int> best_flips;
  Fitness best = std::numeric_limits<Fitness>::min();
  std::int64_t ties = 0;
  const bool by_ones = f.depends_only_on_ones();

  for (std::int64_t k = 0; k < lambda_int; ++k) {
    mutator.sample_flips(rng, flips);
    Fitness fy = 0;
    if (by_ones) {
      int ones = state.x.ones();
      for (int p : flips) ones += state.x[p] ? -1 : 1;
      fy = f.evaluate_ones(ones);
    } else {
      for (int p : flips) state.x.flip(p);
      fy = f.evaluate(state.x);
      for (int p : flips) state.x.flip(p);
    }
    if (fy > best) {
      best = fy;
      ties = 1;
      best_flips = flips;
    } else if (fy == best) {
      // Reservoir choice keeps each tied offspring with probability 1/ties.
      ++ties;
      if (rng.uniform_below(static_cast<std::uint64_t>(ties)) == 0) best_flips = flips;
    }
  }

  StepOutcome out{lambda_int, best, best > state.fitness};
  if (rule == Replacement::Always || best >= state.fitness) {
    for (int p : best_flips) state.x.flip(p);
    state.fitness = best;
  }
  state.evaluations += lambda_int;
  state.generation += 1;
  state.best_so_far = std::max(state.best_so_far, state.fitness);
  return out;
}

}  // namespace

StepOutcome generation_comma(AlgoState& state, const FitnessFunction& f, const ControllerParams& params,
                             const Mutator& mutator, Rng& rng) {
  const auto out = generation_core(state, f, round_lambda(state.lambda), Replacement::Always, mutator, rng);
  state.lambda = update_lambda(state.lambda, out.success, params);
  return out;
}

StepOutcome generation_plus(AlgoState& state, const FitnessFunction& f, const ControllerParams& params,
                            const Mutator& mutator, Rng& rng) {
  const auto out = generation_core(state, f, round_lambda(state.lambda), Replacement::IfNotWorse, mutator, rng);
  state.lambda = update_lambda(state.lambda, out.success, params);
  return out;
}

StepOutcome generation_static(AlgoState& state, const FitnessFunction& f, int lambda, const Mutator& mutator,
                              Rng& rng) {
  return generation_core(state, f, lambda, Replacement::Always, mutator, rng);
}

std::string_view to_string(StopCause cause) {
  switch (cause) {
    case StopCause::Optimum: return "optimum";
    case StopCause::GenerationCap: return "generation_cap";
    case StopCause::EvaluationCap: return "evaluation_cap";
    case StopCause::LambdaAbort: return "lambda_abort";
  }
  return "unknown";
}

TraceLevel parse_trace_level(std::string_view name) {
  if (name == "summary") return TraceLevel::Summary;
  if (name == "levels") return TraceLevel::Levels;
  if (name == "full") return TraceLevel::Full;
  throw std::invalid_argument(fmt::format("unknown trace level '{}' (expected summary, levels or full)", name));
}

std::string_view to_string(TraceLevel level) {
  switch (level) {
    case TraceLevel::Summary: return "summary";
    case TraceLevel::Levels: return "levels";
    case TraceLevel::Full: return "full";
  }
  return "unknown";
}

LevelProfile::LevelProfile(Fitness max_value) {
  const auto size = static_cast<std::size_t>(max_value + 1);
  generations.assign(size, 0);
  evaluations.assign(size, 0);
  first_reach.assign(size, -1);
}

std::int64_t RatchetCounters::gap_violations(double r, int n, int scale) const {
  const double limit = r * std::log2(static_cast<double>(n)) * scale;
  std::int64_t count = 0;
  for (auto it = gap_histogram.rbegin(); it != gap_histogram.rend(); ++it) {
    if (static_cast<double>(it->first) <= limit) break;
    count += it->second;
  }
  return count;
}

RunRecord run_from(AlgoState state, const RunSpec& spec, const FitnessFunction& f, Rng& rng) {
  spec.stop.validate();
  const int n = f.n();
  const bool is_static = spec.algorithm.kind == AlgorithmKind::StaticComma;
  if (is_static) {
    if (spec.algorithm.static_lambda < 1) throw std::invalid_argument("static lambda must be >= 1");
    state.lambda = spec.algorithm.static_lambda;
  }
  const double abort_threshold =
      spec.stop.lambda_abort_threshold.value_or(StoppingCondition::default_abort_threshold(n, spec.params));
  const Mutator mutator(n);

  RunRecord rec;
  rec.initial_fitness = state.fitness;
  const bool with_levels = spec.trace != TraceLevel::Summary;
  if (with_levels) {
    rec.levels.emplace(f.optimum());
    rec.ratchet.emplace();
    rec.ratchet->lambda_threshold = 4.0 * std::log2(static_cast<double>(n));
    std::fill_n(rec.levels->first_reach.begin(), state.best_so_far + 1, std::int64_t{0});
  }

  auto record_state = [&](Fitness previous_best) {
    if (spec.trace == TraceLevel::Full) {
      rec.rows.push_back(TraceRow{state.generation, state.fitness, state.lambda, round_lambda(state.lambda),
                                  state.evaluations, state.best_so_far});
    }
    if (with_levels) {
      ++rec.ratchet->gap_histogram[state.best_so_far - state.fitness];
      for (Fitness v = previous_best + 1; v <= state.best_so_far; ++v) {
        rec.levels->first_reach[static_cast<std::size_t>(v)] = state.evaluations;
      }
    }
  };
  record_state(state.best_so_far);

  while (true) {
    if (spec.stop.stop_on_optimum && f.is_optimum(state.fitness)) {
      rec.stop_cause = StopCause::Optimum;
      break;
    }
    if (!is_static && state.lambda > abort_threshold) {
      rec.stop_cause = StopCause::LambdaAbort;
      break;
    }
    if (spec.stop.max_generations && state.generation >= *spec.stop.max_generations) {
      rec.stop_cause = StopCause::GenerationCap;
      break;
    }
    if (spec.stop.max_evaluations && state.evaluations >= *spec.stop.max_evaluations) {
      rec.stop_cause = StopCause::EvaluationCap;
      break;
    }

    const Fitness parent = state.fitness;
    const Fitness previous_best = state.best_so_far;
    StepOutcome out;
    switch (spec.algorithm.kind) {
      case AlgorithmKind::SelfAdjustingComma: out = generation_comma(state, f, spec.params, mutator, rng); break;
      case AlgorithmKind::SelfAdjustingPlus: out = generation_plus(state, f, spec.params, mutator, rng); break;
      case AlgorithmKind::StaticComma:
        out = generation_static(state, f, spec.algorithm.static_lambda, mutator, rng);
        break;
    }
    if (with_levels) {
      const auto v = static_cast<std::size_t>(parent);
      ++rec.levels->generations[v];
      rec.levels->evaluations[v] += out.lambda_int;
      if (static_cast<double>(out.lambda_int) >= rec.ratchet->lambda_threshold) {
        ++rec.ratchet->eligible_generations;
        if (state.fitness < parent) ++rec.ratchet->drops;
      }
    }
    record_state(previous_best);
  }

  rec.generations = state.generation;
  rec.evaluations = state.evaluations;
  rec.final_fitness = state.fitness;
  rec.best_so_far = state.best_so_far;
  rec.final_lambda = state.lambda;
  return rec;
}

RunRecord run(const RunSpec& spec, const FitnessFunction& f, std::uint64_t seed) {
  Rng rng(seed);
  const int n = f.n();
  std::vector<std::uint8_t> bits(static_cast<std::size_t>(n));
  for (auto& b : bits) b = static_cast<std::uint8_t>(rng() >> 63);
  auto state = AlgoState::initial(SearchPoint(std::move(bits)), f, spec.initial_lambda);
  auto rec = run_from(std::move(state), spec, f, rng);
  rec.seed = seed;
  return rec;
}

}  // namespace selfadj
