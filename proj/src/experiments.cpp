#include "selfadj/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <thread>

#include <fmt/format.h>

#include "selfadj/random.hpp"

namespace selfadj {

void BatchConfig::validate() const {
  if (runs < 1) throw std::invalid_argument(fmt::format("runs must be >= 1, got {}", runs));
  if (n_values.empty()) throw std::invalid_argument("n list is empty");
  if (settings.empty()) throw std::invalid_argument("(F, s) list is empty");
  for (int n : n_values) {
    if (n < 1) throw std::invalid_argument(fmt::format("n must be >= 1, got {}", n));
  }
  for (const auto& st : settings) ControllerParams::make(st.F, st.s);
  if (algorithm == AlgorithmKind::StaticComma && static_lambda < 0) {
    throw std::invalid_argument("static_lambda must be >= 0 (0 selects the default)");
  }
  if (gen_cap_multiplier && !(*gen_cap_multiplier > 0.0)) throw std::invalid_argument("gen_cap_multiplier must be > 0");
  if (eval_cap && *eval_cap < 1) throw std::invalid_argument("eval_cap must be >= 1");
  if (!(initial_lambda >= 1.0)) throw std::invalid_argument("lambda0 must be >= 1");
  if (workers < 0) throw std::invalid_argument("workers must be >= 0");
  if (!stop_on_optimum && !gen_cap_multiplier && !eval_cap) {
    throw std::invalid_argument("runs would never stop: enable stop_on_optimum or set a cap");
  }
  for (int n : n_values) FitnessFunction::parse(function, n);
}

std::int64_t Cell::censored() const {
  return std::count_if(runs.begin(), runs.end(), [](const RunRecord& r) { return r.censored(); });
}

BatchResult run_batch(const BatchConfig& config, const ProgressFn& progress) {
  config.validate();
  BatchResult result;
  result.config = config;

  struct Job {
    RunSpec spec;
    FitnessFunction f;
  };
  std::vector<Job> jobs;
  for (int n : config.n_values) {
    for (const auto& setting : config.settings) {
      Cell cell;
      cell.n = n;
      cell.setting = setting;
      cell.function = config.function;
      cell.algorithm = config.algorithm == AlgorithmKind::StaticComma
                           ? Algorithm::static_comma(config.static_lambda > 0 ? config.static_lambda
                                                                              : default_static_lambda(n))
                           : Algorithm{config.algorithm, 0};
      auto f = FitnessFunction::parse(config.function, n);
      cell.scale = f.scale();
      cell.optimum = f.optimum();

      RunSpec spec;
      spec.algorithm = cell.algorithm;
      spec.params = ControllerParams::make(setting.F, setting.s);
      spec.stop.stop_on_optimum = config.stop_on_optimum;
      if (config.gen_cap_multiplier) {
        cell.generation_cap = static_cast<std::int64_t>(std::llround(*config.gen_cap_multiplier * n));
        spec.stop.max_generations = cell.generation_cap;
      }
      spec.stop.max_evaluations = config.eval_cap;
      spec.trace = config.trace;
      spec.initial_lambda = config.initial_lambda;
      cell.runs.resize(static_cast<std::size_t>(config.runs));
      result.cells.push_back(std::move(cell));
      jobs.push_back(Job{spec, std::move(f)});
    }
  }

  const auto runs = static_cast<std::int64_t>(config.runs);
  const auto total = static_cast<std::int64_t>(result.cells.size()) * runs;
  std::atomic<std::int64_t> next{0};
  std::atomic<std::int64_t> done{0};
  auto worker = [&]() {
    for (std::int64_t k = next++; k < total; k = next++) {
      const auto c = static_cast<std::size_t>(k / runs);
      const auto r = static_cast<std::size_t>(k % runs);
      auto rec = run(jobs[c].spec, jobs[c].f, child_seed(config.master_seed, static_cast<std::uint64_t>(k)));
      rec.run_id = static_cast<std::uint64_t>(k);
      result.cells[c].runs[r] = std::move(rec);
      const auto finished = ++done;
      if (progress) progress(finished, total);
    }
  };

  int workers = config.workers > 0 ? config.workers : static_cast<int>(std::thread::hardware_concurrency());
  workers = static_cast<int>(std::clamp<std::int64_t>(workers, 1, std::max<std::int64_t>(total, 1)));
  if (workers == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(worker);
  }
  return result;
}

double n_log2_n(int n) { return n * std::log2(static_cast<double>(n)); }

std::vector<RuntimeStats> normalized_runtime_stats(const BatchResult& batch) {
  std::vector<RuntimeStats> out;
  for (const auto& cell : batch.cells) {
    RuntimeStats st;
    st.n = cell.n;
    st.setting = cell.setting;
    st.algorithm = cell.algorithm.name();
    st.runs = static_cast<std::int64_t>(cell.runs.size());
    st.censored = cell.censored();
    std::vector<double> values;
    const double norm = n_log2_n(cell.n);
    for (const auto& r : cell.runs) {
      if (!r.censored()) values.push_back(static_cast<double>(r.evaluations) / (norm > 0.0 ? norm : 1.0));
    }
    if (!values.empty()) st.normalized = summarize(std::move(values));
    out.push_back(std::move(st));
  }
  return out;
}

std::vector<SweepRow> sweep_table(const BatchResult& batch, double level, int resamples) {
  std::vector<SweepRow> out;
  for (std::size_t c = 0; c < batch.cells.size(); ++c) {
    const auto& cell = batch.cells[c];
    SweepRow row;
    row.n = cell.n;
    row.setting = cell.setting;
    row.runs = static_cast<std::int64_t>(cell.runs.size());
    std::vector<double> values;
    for (const auto& r : cell.runs) {
      if (!r.censored()) ++row.reached;
      std::int64_t g = r.generations;
      if (cell.generation_cap > 0) g = r.censored() ? cell.generation_cap : std::min(g, cell.generation_cap);
      values.push_back(static_cast<double>(g) / cell.n);
    }
    row.mean_generations = mean(values);
    const auto seed = child_seed(batch.config.master_seed ^ 0xB007'5742'A9E1'0001ULL, c);
    row.ci = bootstrap_mean_ci(values, level, resamples, seed);
    out.push_back(row);
  }
  return out;
}

std::vector<SweepRow> success_rate_sweep(const std::vector<int>& n_values, const std::vector<double>& s_values,
                                         double F, int runs, std::uint64_t master_seed, int workers) {
  BatchConfig cfg;
  cfg.algorithm = AlgorithmKind::SelfAdjustingComma;
  cfg.n_values = n_values;
  cfg.settings.clear();
  for (double s : s_values) cfg.settings.push_back({F, s});
  cfg.runs = runs;
  cfg.master_seed = master_seed;
  cfg.gen_cap_multiplier = 500.0;
  cfg.workers = workers;
  return sweep_table(run_batch(cfg));
}

namespace {

void require_levels(const Cell& cell) {
  for (const auto& r : cell.runs) {
    if (!r.levels || !r.ratchet) throw std::invalid_argument("per-fitness statistics need trace level 'levels' or 'full'");
  }
}

}  // namespace

std::vector<FixedTargetRow> fixed_target_table(const Cell& cell, std::vector<Fitness> targets) {
  require_levels(cell);
  if (targets.empty()) {
    for (Fitness v = 0; v <= cell.optimum; ++v) targets.push_back(v);
  }
  std::vector<FixedTargetRow> out;
  for (Fitness t : targets) {
    if (t < 0 || t > cell.optimum) throw std::invalid_argument(fmt::format("target {} outside [0, optimum]", t));
    FixedTargetRow row;
    row.target = static_cast<double>(t) / cell.scale;
    row.runs = static_cast<std::int64_t>(cell.runs.size());
    double sum = 0.0;
    for (const auto& r : cell.runs) {
      const auto hit = r.levels->first_reach[static_cast<std::size_t>(t)];
      if (hit >= 0) {
        ++row.reached;
        sum += static_cast<double>(hit);
      }
    }
    if (row.reached > 0) row.mean_evaluations_reached = sum / static_cast<double>(row.reached);
    if (row.reached == row.runs && row.runs > 0) row.mean_evaluations = row.mean_evaluations_reached;
    out.push_back(row);
  }
  return out;
}

std::vector<LevelLambdaRow> lambda_per_fitness(const Cell& cell) {
  require_levels(cell);
  const auto size = static_cast<std::size_t>(cell.optimum + 1);
  std::vector<std::int64_t> gens(size, 0), evals(size, 0);
  for (const auto& r : cell.runs) {
    for (std::size_t v = 0; v < size; ++v) {
      gens[v] += r.levels->generations[v];
      evals[v] += r.levels->evaluations[v];
    }
  }
  std::vector<LevelLambdaRow> out;
  for (std::size_t v = 0; v < size; ++v) {
    if (gens[v] == 0) continue;
    out.push_back({static_cast<double>(v) / cell.scale, gens[v],
                   static_cast<double>(evals[v]) / static_cast<double>(gens[v])});
  }
  return out;
}

std::vector<LevelShareRow> evals_per_fitness_histogram(const Cell& cell) {
  require_levels(cell);
  const auto size = static_cast<std::size_t>(cell.optimum + 1);
  std::vector<std::int64_t> evals(size, 0);
  std::int64_t total = 0;
  for (const auto& r : cell.runs) {
    for (std::size_t v = 0; v < size; ++v) {
      evals[v] += r.levels->evaluations[v];
      total += r.levels->evaluations[v];
    }
  }
  std::vector<LevelShareRow> out;
  for (std::size_t v = 0; v < size; ++v) {
    const double pct = total > 0 ? 100.0 * static_cast<double>(evals[v]) / static_cast<double>(total) : 0.0;
    out.push_back({static_cast<double>(v) / cell.scale, evals[v], pct});
  }
  return out;
}

std::vector<RatchetRow> ratchet_monitor(const Cell& cell, const std::vector<double>& r_values) {
  require_levels(cell);
  std::vector<RatchetRow> out;
  for (double r : r_values) {
    RatchetRow row;
    row.r = r;
    row.runs = static_cast<std::int64_t>(cell.runs.size());
    for (const auto& rec : cell.runs) {
      const auto v = rec.ratchet->gap_violations(r, cell.n, cell.scale);
      row.gap_violations += v;
      if (v > 0) ++row.runs_with_gap_violations;
      row.eligible_generations += rec.ratchet->eligible_generations;
      row.drops += rec.ratchet->drops;
    }
    row.drop_fraction = row.eligible_generations > 0
                            ? static_cast<double>(row.drops) / static_cast<double>(row.eligible_generations)
                            : 0.0;
    out.push_back(row);
  }
  return out;
}

LevelProfile level_profile_from_rows(const std::vector<TraceRow>& rows, Fitness optimum) {
  LevelProfile prof(optimum);
  if (rows.empty()) return prof;
  Fitness best = -1;
  for (std::size_t k = 0; k < rows.size(); ++k) {
    const auto& row = rows[k];
    if (k > 0) {
      const auto& parent = rows[k - 1];
      ++prof.generations[static_cast<std::size_t>(parent.fitness)];
      prof.evaluations[static_cast<std::size_t>(parent.fitness)] += row.evaluations - parent.evaluations;
    }
    for (Fitness v = best + 1; v <= row.fitness; ++v) prof.first_reach[static_cast<std::size_t>(v)] = row.evaluations;
    best = std::max(best, row.fitness);
  }
  return prof;
}

RatchetCounters ratchet_from_rows(const std::vector<TraceRow>& rows, int n) {
  RatchetCounters rc;
  rc.lambda_threshold = 4.0 * std::log2(static_cast<double>(n));
  Fitness best = std::numeric_limits<Fitness>::min();
  for (std::size_t k = 0; k < rows.size(); ++k) {
    best = std::max(best, rows[k].fitness);
    ++rc.gap_histogram[best - rows[k].fitness];
    if (k > 0 && static_cast<double>(rows[k - 1].lambda_int) >= rc.lambda_threshold) {
      ++rc.eligible_generations;
      if (rows[k].fitness < rows[k - 1].fitness) ++rc.drops;
    }
  }
  return rc;
}

}  // namespace selfadj
