#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "selfadj/ea.hpp"
#include "selfadj/stats.hpp"

namespace selfadj {

struct ControllerSetting {
  double F = 1.5;
  double s = 1.0;
};

struct BatchConfig {
  AlgorithmKind algorithm = AlgorithmKind::SelfAdjustingComma;
  /// StaticComma only; 0 selects default_static_lambda(n) per cell.
  int static_lambda = 0;
  std::string function = "onemax";
  std::vector<int> n_values;
  std::vector<ControllerSetting> settings{ControllerSetting{}};
  int runs = 1;
  std::uint64_t master_seed = 1;
  /// Generation cap = multiplier * n.
  std::optional<double> gen_cap_multiplier = 500.0;
  std::optional<std::int64_t> eval_cap;
  bool stop_on_optimum = true;
  TraceLevel trace = TraceLevel::Summary;
  double initial_lambda = 1.0;
  /// Worker threads; 0 uses the hardware concurrency.
  int workers = 0;

  void validate() const;
};

/// One (n, F, s) combination. Cells are ordered n-major.
struct Cell {
  int n = 0;
  ControllerSetting setting;
  Algorithm algorithm;
  std::string function;
  int scale = 1;               // fitness scale (2 for cliff)
  Fitness optimum = 0;         // scaled
  std::int64_t generation_cap = 0;  // 0: none
  std::vector<RunRecord> runs;

  std::int64_t censored() const;
};

struct BatchResult {
  BatchConfig config;
  std::vector<Cell> cells;
};

/// Called after each finished run with (finished, total); from worker threads.
using ProgressFn = std::function<void(std::int64_t, std::int64_t)>;

/// Runs every cell. Run r of cell c uses child_seed(master_seed, c * runs + r),
/// so the result does not depend on the number of workers.
BatchResult run_batch(const BatchConfig& config, const ProgressFn& progress = {});

struct RuntimeStats {
  int n = 0;
  ControllerSetting setting;
  std::string algorithm;
  std::int64_t runs = 0;
  std::int64_t censored = 0;
  std::optional<Summary> normalized;  // evaluations / (n log2 n), optimum runs only
};

/// log2-based n log n normalizer.
double n_log2_n(int n);
std::vector<RuntimeStats> normalized_runtime_stats(const BatchResult& batch);

struct SweepRow {
  int n = 0;
  ControllerSetting setting;
  std::int64_t runs = 0;
  std::int64_t reached = 0;
  double mean_generations = 0.0;  // min(generations, cap) / n, averaged
  Interval ci;
};

inline constexpr int kBootstrapResamples = 10000;

/// Mean normalized generations per cell with a percentile bootstrap interval.
std::vector<SweepRow> sweep_table(const BatchResult& batch, double level = 0.99,
                                  int resamples = kBootstrapResamples);
/// Runs the comma EA over n_values x s_values with the given F and a 500n
/// generation cap, then tabulates.
std::vector<SweepRow> success_rate_sweep(const std::vector<int>& n_values, const std::vector<double>& s_values,
                                         double F, int runs, std::uint64_t master_seed, int workers = 0);

struct FixedTargetRow {
  double target = 0.0;  // unscaled fitness
  std::int64_t runs = 0;
  std::int64_t reached = 0;
  /// Mean first-hit evaluations over all runs; empty unless every run reached the target.
  std::optional<double> mean_evaluations;
  /// Mean over the runs that did reach it; empty if none did.
  std::optional<double> mean_evaluations_reached;
};

/// Targets are scaled fitness values in [0, optimum]; all of them when empty.
std::vector<FixedTargetRow> fixed_target_table(const Cell& cell, std::vector<Fitness> targets = {});

struct LevelLambdaRow {
  double fitness = 0.0;
  std::int64_t generations = 0;
  double mean_lambda = 0.0;
};
/// Mean offspring count over all generations whose parent has each fitness.
std::vector<LevelLambdaRow> lambda_per_fitness(const Cell& cell);

struct LevelShareRow {
  double fitness = 0.0;
  std::int64_t evaluations = 0;
  double percent = 0.0;
};
/// Share of all evaluations spent from parents of each fitness; unvisited
/// values are listed with 0.
std::vector<LevelShareRow> evals_per_fitness_histogram(const Cell& cell);

struct RatchetRow {
  double r = 0.0;
  std::int64_t runs = 0;
  std::int64_t runs_with_gap_violations = 0;
  std::int64_t gap_violations = 0;
  std::int64_t eligible_generations = 0;
  std::int64_t drops = 0;
  double drop_fraction = 0.0;
};
std::vector<RatchetRow> ratchet_monitor(const Cell& cell, const std::vector<double>& r_values);

/// Rebuilds the level profile and ratchet counters of a run from its full
/// trace rows; must equal what the run collected online.
LevelProfile level_profile_from_rows(const std::vector<TraceRow>& rows, Fitness optimum);
RatchetCounters ratchet_from_rows(const std::vector<TraceRow>& rows, int n);

}  // namespace selfadj
