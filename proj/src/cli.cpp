#include "selfadj/cli.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <mutex>
#include <numbers>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "selfadj/ea.hpp"
#include "selfadj/experiments.hpp"
#include "selfadj/fitness.hpp"
#include "selfadj/oracle.hpp"
#include "selfadj/report.hpp"

namespace selfadj::cli {

using nlohmann::json;

namespace {

enum class Type { Int, Num, Str, Bool, IntList, NumList, StrList };

struct Key {
  std::string name;
  Type type;
  json def;  // null for optional keys
  std::string help;
};

std::string default_out_dir() {
  const char* env = std::getenv("SELFADJ_OUT_DIR");
  return env != nullptr && *env != '\0' ? std::string(env) : std::string("results");
}

const std::vector<std::string>& commands() {
  static const std::vector<std::string> names = {"run",         "batch",        "sweep", "fixed-target",
                                                 "drift-check", "bounds-check", "bound"};
  return names;
}

std::vector<Key> schema(const std::string& command) {
  const Key out{"out", Type::Str, default_out_dir(), "output directory (default $SELFADJ_OUT_DIR or ./results)"};
  const Key function{"function", Type::Str, "onemax", "onemax, zeromax, twomax, jump:k, cliff:d or ridge"};
  const Key seed{"seed", Type::Int, 1, "master seed"};
  const Key lambda0{"lambda0", Type::Num, 1.0, "initial offspring population size"};
  const Key static_lambda{"static_lambda", Type::Int, 0, "lambda of the static algorithm (0: ceil(log_{e/(e-1)} n))"};
  const Key gen_cap{"gen_cap_multiplier", Type::Num, 500.0, "generation cap as a multiple of n (none to disable)"};
  const Key eval_cap{"eval_cap", Type::Int, json(), "evaluation cap (none by default)"};
  const Key stop{"stop_on_optimum", Type::Bool, true, "stop when the optimum value is reached"};
  const Key runs{"runs", Type::Int, 100, "runs per cell"};
  const Key r_values{"r_values", Type::NumList, json::array({1, 2, 5, 10, 20}), "r values of the best-so-far gap monitor"};

  if (command == "run") {
    return {{"algorithm", Type::Str, "comma", "comma, plus or static"},
            function,
            {"n", Type::Int, 100, "problem size"},
            {"F", Type::Num, 1.5, "update strength"},
            {"s", Type::Num, 1.0, "success rate"},
            lambda0,
            static_lambda,
            seed,
            gen_cap,
            eval_cap,
            stop,
            {"trace", Type::Str, "summary", "summary, levels or full"},
            out};
  }
  if (command == "batch" || command == "fixed-target") {
    return {{"algorithm", Type::StrList, json::array({"comma"}), "algorithms (comma, plus, static)"},
            function,
            {"n", Type::IntList, json::array({100}), "problem sizes"},
            {"F", Type::NumList, json::array({1.5}), "update strengths"},
            {"s", Type::NumList, json::array({1.0}), "success rates"},
            runs,
            seed,
            lambda0,
            static_lambda,
            gen_cap,
            eval_cap,
            stop,
            {"trace", Type::Str, command == "batch" ? "summary" : "levels", "summary, levels or full"},
            r_values,
            out};
  }
  if (command == "sweep") {
    return {function,
            {"n", Type::IntList, json::array({100}), "problem sizes"},
            {"F", Type::NumList, json::array({1.5}), "update strengths"},
            {"s", Type::NumList, json::array({0.5, 1, 2, 5, 10, 20}), "success rates"},
            runs,
            seed,
            lambda0,
            gen_cap,
            eval_cap,
            {"ci_level", Type::Num, 0.99, "bootstrap confidence level"},
            {"resamples", Type::Int, 10000, "bootstrap resamples"},
            out};
  }
  if (command == "drift-check") {
    return {{"potential", Type::Str, "g1", "g1 or g2"},
            {"n", Type::Int, 1000, "problem size"},
            {"F", Type::Num, 1.5, "update strength"},
            {"s", Type::Num, json(), "success rate (default 0.5 for g1, 18 for g2)"},
            {"threshold", Type::Num, json(), "drift threshold (default (1-s)/(2e) for g1, -0.0008 for g2)"},
            {"gain", Type::Str, json(), "exact, capped or both (default both for g1, exact for g2)"},
            out};
  }
  if (command == "bounds-check") {
    return {{"n", Type::IntList, json::array({2, 10, 50, 163, 500}), "problem sizes"},
            {"lambda_max", Type::Int, 64, "lambda runs over 1..lambda_max"},
            {"rows", Type::Str, "violations", "rows to write: violations or all"},
            out};
  }
  if (command == "bound") {
    return {{"n", Type::Int, 1000, "problem size"},
            {"a", Type::Int, 0, "starting fitness"},
            {"b", Type::Int, json(), "target fitness (default n)"},
            {"F", Type::Num, 1.5, "update strength"},
            {"s", Type::Num, 1.0, "success rate"},
            lambda0,
            out};
  }
  throw ConfigError(fmt::format("unknown subcommand '{}'", command));
}

const Key& find_key(const std::vector<Key>& keys, const std::string& name, const std::string& command) {
  for (const auto& k : keys) {
    if (k.name == name) return k;
  }
  throw ConfigError(fmt::format("unknown key '{}' for subcommand {}", name, command));
}

json parse_scalar(Type type, const std::string& text, const std::string& key) {
  try {
    std::size_t used = 0;
    switch (type) {
      case Type::Int:
      case Type::IntList: {
        const long long v = std::stoll(text, &used);
        if (used != text.size()) break;
        return v;
      }
      case Type::Num:
      case Type::NumList: {
        const double v = std::stod(text, &used);
        if (used != text.size()) break;
        return v;
      }
      case Type::Bool:
        if (text == "true" || text == "1") return true;
        if (text == "false" || text == "0") return false;
        break;
      case Type::Str:
      case Type::StrList:
        return text;
    }
  } catch (const std::exception&) {
  }
  throw ConfigError(fmt::format("key '{}': cannot parse '{}'", key, text));
}

bool is_list(Type t) { return t == Type::IntList || t == Type::NumList || t == Type::StrList; }

json parse_flag(const Key& key, const std::string& text) {
  if (text == "none" || text == "null") {
    if (!key.def.is_null() && key.name != "gen_cap_multiplier") {
      throw ConfigError(fmt::format("key '{}' cannot be none", key.name));
    }
    return json();
  }
  if (!is_list(key.type)) return parse_scalar(key.type, text, key.name);
  json arr = json::array();
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) arr.push_back(parse_scalar(key.type, item, key.name));
  }
  if (arr.empty()) throw ConfigError(fmt::format("key '{}': empty list", key.name));
  return arr;
}

// Checks a JSON value from a file against the key type; scalars become
// one-element lists where a list is expected.
json check_value(const Key& key, const json& v) {
  if (v.is_null()) {
    if (!key.def.is_null() && key.name != "gen_cap_multiplier") {
      throw ConfigError(fmt::format("key '{}' cannot be null", key.name));
    }
    return v;
  }
  auto scalar_ok = [&](const json& x) {
    switch (key.type) {
      case Type::Int:
      case Type::IntList: return x.is_number_integer();
      case Type::Num:
      case Type::NumList: return x.is_number();
      case Type::Bool: return x.is_boolean();
      case Type::Str:
      case Type::StrList: return x.is_string();
    }
    return false;
  };
  if (is_list(key.type)) {
    const json arr = v.is_array() ? v : json::array({v});
    if (arr.empty()) throw ConfigError(fmt::format("key '{}': empty list", key.name));
    for (const auto& x : arr) {
      if (!scalar_ok(x)) throw ConfigError(fmt::format("key '{}': wrong element type in {}", key.name, v.dump()));
    }
    return arr;
  }
  if (!scalar_ok(v)) throw ConfigError(fmt::format("key '{}': wrong type for value {}", key.name, v.dump()));
  return v;
}

json preset_values(const std::string& preset, bool full_scale) {
  if (preset == "fig2") {
    return {{"algorithm", {"comma", "plus", "static"}},
            {"n", {100, 200, 500, 1000}},
            {"F", {1.5}},
            {"s", {1.0}},
            {"runs", full_scale ? 1000 : 200},
            {"gen_cap_multiplier", 500.0}};
  }
  if (preset == "fig3") {
    return {{"n", {100, 200, 500, 1000}},
            {"F", {1.5}},
            {"s", {0.5, 1, 1.5, 2, 2.5, 3, 3.4, 4, 5, 10, 20}},
            {"runs", full_scale ? 100 : 30},
            {"gen_cap_multiplier", 500.0}};
  }
  if (preset == "fig4" || preset == "fig5") {
    return {{"algorithm", {"comma"}},
            {"n", {1000}},
            {"F", {1.5}},
            {"s", {0.5, 1, 2, 3, 3.4, 4}},
            {"runs", full_scale ? 100 : 20},
            {"gen_cap_multiplier", 500.0},
            {"trace", "levels"}};
  }
  if (preset == "fig6") {
    return {{"algorithm", {"comma"}},
            {"n", {100}},
            {"F", {1.5}},
            {"s", {1, 2, 3, 3.4, 4, 5, 10, 20}},
            {"runs", 100},
            {"gen_cap_multiplier", nullptr},
            {"eval_cap", 1500000},
            {"trace", "levels"}};
  }
  throw ConfigError(fmt::format("unknown preset '{}' (expected fig2..fig6)", preset));
}

}  // namespace

std::string preset_command(const std::string& preset) {
  if (preset == "fig2") return "batch";
  if (preset == "fig3") return "sweep";
  if (preset == "fig4" || preset == "fig5" || preset == "fig6") return "fixed-target";
  throw ConfigError(fmt::format("unknown preset '{}' (expected fig2..fig6)", preset));
}

json resolve_config(const std::string& command, const std::string& preset, bool full_scale, const json& file,
                    const std::vector<std::pair<std::string, std::string>>& flags) {
  const auto keys = schema(command);
  json cfg = json::object();
  for (const auto& k : keys) cfg[k.name] = k.def;
  if (!preset.empty()) {
    if (preset_command(preset) != command) {
      throw ConfigError(fmt::format("preset '{}' belongs to subcommand {}", preset, preset_command(preset)));
    }
    const json values = preset_values(preset, full_scale);
    for (const auto& [name, v] : values.items()) {
      cfg[name] = check_value(find_key(keys, name, command), v);
    }
  } else if (full_scale) {
    throw ConfigError("--full-scale needs --paper-preset");
  }
  if (!file.is_null()) {
    if (!file.is_object()) throw ConfigError("config file must hold a flat JSON object");
    for (const auto& [name, v] : file.items()) {
      if (v.is_object()) throw ConfigError(fmt::format("key '{}': nested objects are not allowed", name));
      cfg[name] = check_value(find_key(keys, name, command), v);
    }
  }
  for (const auto& [name, text] : flags) cfg[name] = parse_flag(find_key(keys, name, command), text);
  return cfg;
}

namespace {

struct Runtime {
  int workers = 0;
  bool timestamp = true;
  bool quiet = false;
  std::ostream* out = nullptr;
  std::ostream* err = nullptr;
};

template <typename T>
T get(const json& cfg, const std::string& key) {
  try {
    return cfg.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError(fmt::format("key '{}': invalid value {}", key, cfg.contains(key) ? cfg[key].dump() : "<missing>"));
  }
}

template <typename T>
std::optional<T> get_opt(const json& cfg, const std::string& key) {
  if (cfg.at(key).is_null()) return std::nullopt;
  return get<T>(cfg, key);
}

int positive_int(const json& cfg, const std::string& key, long long min_value = 1) {
  const auto v = get<long long>(cfg, key);
  if (v < min_value || v > std::numeric_limits<int>::max()) {
    throw ConfigError(fmt::format("key '{}': {} is out of range (minimum {})", key, v, min_value));
  }
  return static_cast<int>(v);
}

std::uint64_t seed_of(const json& cfg) {
  const auto v = get<long long>(cfg, "seed");
  if (v < 0) throw ConfigError("key 'seed': must be >= 0");
  return static_cast<std::uint64_t>(v);
}

json header_config(const std::string& command, json cfg) {
  cfg.erase("out");
  cfg["command"] = command;
  return cfg;
}

std::ofstream open_output(const std::filesystem::path& dir, const std::string& name) {
  std::filesystem::create_directories(dir);
  std::ofstream os(dir / name, std::ios::binary);
  if (!os) throw std::runtime_error(fmt::format("cannot open {} for writing", (dir / name).string()));
  return os;
}

class OutputSet {
 public:
  OutputSet(const std::string& command, const json& cfg, std::uint64_t seed, const Runtime& rt)
      : dir_(get<std::string>(cfg, "out")), config_(header_config(command, cfg)), seed_(seed), rt_(rt) {}

  template <typename Writer>
  void write(const std::string& file, const std::string& kind, const std::vector<std::string>& notes, Writer&& body) {
    auto os = open_output(dir_, file);
    write_header(os, OutputHeader{kind, config_, seed_, rt_.timestamp, notes});
    body(os);
    if (!os) throw std::runtime_error(fmt::format("failed writing {}", (dir_ / file).string()));
    written_.push_back((dir_ / file).string());
  }

  const std::vector<std::string>& written() const { return written_; }

 private:
  std::filesystem::path dir_;
  json config_;
  std::uint64_t seed_;
  const Runtime& rt_;
  std::vector<std::string> written_;
};

ProgressFn progress_printer(const Runtime& rt, const std::string& label) {
  if (rt.quiet) return {};
  auto mutex = std::make_shared<std::mutex>();
  auto last = std::make_shared<std::int64_t>(-1);
  std::ostream* err = rt.err;
  return [mutex, last, err, label](std::int64_t done, std::int64_t total) {
    const std::int64_t decile = done * 10 / total;
    std::lock_guard lock(*mutex);
    if (decile > *last) {
      *last = decile;
      *err << fmt::format("[{}] {}/{} runs\n", label, done, total) << std::flush;
    }
  };
}

RunSpec run_spec_from(const json& cfg, int n) {
  RunSpec spec;
  const auto kind = Algorithm::parse_kind(get<std::string>(cfg, "algorithm"));
  const int static_lambda = positive_int(cfg, "static_lambda", 0);
  spec.algorithm = kind == AlgorithmKind::StaticComma
                       ? Algorithm::static_comma(static_lambda > 0 ? static_lambda : default_static_lambda(n))
                       : Algorithm{kind, 0};
  spec.params = ControllerParams::make(get<double>(cfg, "F"), get<double>(cfg, "s"));
  spec.stop.stop_on_optimum = get<bool>(cfg, "stop_on_optimum");
  if (const auto mult = get_opt<double>(cfg, "gen_cap_multiplier")) {
    if (!(*mult > 0.0)) throw ConfigError("key 'gen_cap_multiplier': must be > 0");
    spec.stop.max_generations = static_cast<std::int64_t>(std::llround(*mult * n));
  }
  spec.stop.max_evaluations = get_opt<std::int64_t>(cfg, "eval_cap");
  spec.trace = parse_trace_level(get<std::string>(cfg, "trace"));
  spec.initial_lambda = get<double>(cfg, "lambda0");
  return spec;
}

int cmd_run(const json& cfg, const Runtime& rt) {
  const int n = positive_int(cfg, "n");
  const auto f = FitnessFunction::parse(get<std::string>(cfg, "function"), n);
  const auto spec = run_spec_from(cfg, n);
  const auto seed = seed_of(cfg);
  const auto rec = run(spec, f, seed);

  OutputSet outputs("run", cfg, seed, rt);
  const double scale = f.scale();
  outputs.write("run.csv", "run", {"fitness columns are in doubled units for cliff (divide by 2)"},
                [&](std::ostream& os) { write_run_rows(os, rec); });
  const json summary = {{"command", "run"},
                        {"algorithm", spec.algorithm.name()},
                        {"function", f.name()},
                        {"n", n},
                        {"seed", seed},
                        {"stop_cause", std::string(to_string(rec.stop_cause))},
                        {"generations", rec.generations},
                        {"evaluations", rec.evaluations},
                        {"final_fitness", static_cast<double>(rec.final_fitness) / scale},
                        {"final_lambda", rec.final_lambda},
                        {"outputs", outputs.written()}};
  *rt.out << summary.dump() << '\n';
  return kExitOk;
}

std::vector<BatchResult> run_batches(const std::string& command, const json& cfg, const Runtime& rt) {
  std::vector<BatchResult> results;
  const auto algorithms = get<std::vector<std::string>>(cfg, "algorithm");
  for (const auto& name : algorithms) {
    BatchConfig bc;
    bc.algorithm = Algorithm::parse_kind(name);
    bc.static_lambda = positive_int(cfg, "static_lambda", 0);
    bc.function = get<std::string>(cfg, "function");
    bc.n_values = get<std::vector<int>>(cfg, "n");
    bc.settings.clear();
    for (double F : get<std::vector<double>>(cfg, "F")) {
      for (double s : get<std::vector<double>>(cfg, "s")) bc.settings.push_back({F, s});
    }
    bc.runs = positive_int(cfg, "runs");
    bc.master_seed = seed_of(cfg);
    bc.gen_cap_multiplier = get_opt<double>(cfg, "gen_cap_multiplier");
    bc.eval_cap = get_opt<std::int64_t>(cfg, "eval_cap");
    bc.stop_on_optimum = get<bool>(cfg, "stop_on_optimum");
    bc.trace = parse_trace_level(get<std::string>(cfg, "trace"));
    bc.initial_lambda = get<double>(cfg, "lambda0");
    bc.workers = rt.workers;
    results.push_back(run_batch(bc, progress_printer(rt, fmt::format("{} {}", command, name))));
  }
  return results;
}

int cmd_batch(const std::string& command, const json& cfg, const Runtime& rt) {
  const auto trace = parse_trace_level(get<std::string>(cfg, "trace"));
  if (command == "fixed-target" && trace == TraceLevel::Summary) {
    throw ConfigError("key 'trace': fixed-target needs levels or full");
  }
  const auto results = run_batches(command, cfg, rt);
  std::vector<const Cell*> cells;
  std::vector<RuntimeStats> stats;
  std::int64_t total_runs = 0, censored = 0;
  for (const auto& b : results) {
    for (const auto& c : b.cells) {
      cells.push_back(&c);
      total_runs += static_cast<std::int64_t>(c.runs.size());
      censored += c.censored();
    }
    const auto s = normalized_runtime_stats(b);
    stats.insert(stats.end(), s.begin(), s.end());
  }

  OutputSet outputs(command, cfg, seed_of(cfg), rt);
  outputs.write("batch_runs.csv", "batch_runs", {}, [&](std::ostream& os) { write_run_summaries(os, cells); });
  if (command == "batch") {
    outputs.write("fig2_boxstats.csv", "fig2_boxstats",
                  {"evaluations / (n log2 n) over runs that reached the optimum; censored runs counted, not summarized"},
                  [&](std::ostream& os) { write_boxstats(os, stats); });
  }
  if (trace != TraceLevel::Summary) {
    outputs.write("fig4_fixed_target.csv", "fig4_fixed_target",
                  {"evaluations counted after the generation that first reaches the target",
                   "mean_evaluations is empty unless every run reached the target"},
                  [&](std::ostream& os) { write_fixed_target(os, cells); });
    outputs.write("fig5_lambda_levels.csv", "fig5_lambda_levels", {"mean offspring count per parent fitness"},
                  [&](std::ostream& os) { write_lambda_levels(os, cells); });
    outputs.write("fig6_eval_histogram.csv", "fig6_eval_histogram", {"percent of all evaluations per parent fitness"},
                  [&](std::ostream& os) { write_eval_histogram(os, cells); });
    const auto r_values = get<std::vector<double>>(cfg, "r_values");
    outputs.write("ratchet_report.csv", "ratchet_report",
                  {"drops: fitness decreases in generations with lambda_int >= 4 log2 n",
                   "gap violations: states with f(x_t) < best_so_far - r log2 n"},
                  [&](std::ostream& os) { write_ratchet(os, cells, r_values); });
  }
  const json summary = {{"command", command},     {"cells", cells.size()},          {"runs", total_runs},
                        {"censored", censored}, {"outputs", outputs.written()}};
  *rt.out << summary.dump() << '\n';
  return kExitOk;
}

int cmd_sweep(const json& cfg, const Runtime& rt) {
  BatchConfig bc;
  bc.algorithm = AlgorithmKind::SelfAdjustingComma;
  bc.function = get<std::string>(cfg, "function");
  bc.n_values = get<std::vector<int>>(cfg, "n");
  bc.settings.clear();
  for (double F : get<std::vector<double>>(cfg, "F")) {
    for (double s : get<std::vector<double>>(cfg, "s")) bc.settings.push_back({F, s});
  }
  bc.runs = positive_int(cfg, "runs");
  bc.master_seed = seed_of(cfg);
  bc.gen_cap_multiplier = get_opt<double>(cfg, "gen_cap_multiplier");
  bc.eval_cap = get_opt<std::int64_t>(cfg, "eval_cap");
  bc.initial_lambda = get<double>(cfg, "lambda0");
  bc.workers = rt.workers;
  const double level = get<double>(cfg, "ci_level");
  const int resamples = positive_int(cfg, "resamples");
  if (!(level > 0.0 && level < 1.0)) throw ConfigError("key 'ci_level': must lie in (0, 1)");

  const auto batch = run_batch(bc, progress_printer(rt, "sweep"));
  const auto rows = sweep_table(batch, level, resamples);
  OutputSet outputs("sweep", cfg, bc.master_seed, rt);
  outputs.write("fig3_sweep.csv", "fig3_sweep",
                {"mean of min(generations, cap) / n; censored runs count at the cap",
                 "percentile bootstrap interval for the mean"},
                [&](std::ostream& os) { write_sweep(os, rows); });
  std::vector<const Cell*> cells;
  for (const auto& c : batch.cells) cells.push_back(&c);
  outputs.write("batch_runs.csv", "batch_runs", {}, [&](std::ostream& os) { write_run_summaries(os, cells); });
  json table = json::array();
  for (const auto& r : rows) {
    table.push_back({{"n", r.n}, {"s", r.setting.s}, {"mean_generations_over_n", r.mean_generations},
                     {"reached", r.reached}});
  }
  *rt.out << json{{"command", "sweep"}, {"cells", table}, {"outputs", outputs.written()}}.dump() << '\n';
  return kExitOk;
}

int cmd_drift(const json& cfg, const Runtime& rt) {
  const auto potential = get<std::string>(cfg, "potential");
  if (potential != "g1" && potential != "g2") throw ConfigError("key 'potential': expected g1 or g2");
  const bool is_g1 = potential == "g1";
  const int n = positive_int(cfg, "n", 2);
  const double F = get<double>(cfg, "F");
  const double s = get_opt<double>(cfg, "s").value_or(is_g1 ? 0.5 : 18.0);
  const auto params = ControllerParams::make(F, s);
  const double threshold =
      get_opt<double>(cfg, "threshold").value_or(is_g1 ? (1.0 - s) / (2.0 * std::numbers::e) : -0.0008);
  const auto gain = get_opt<std::string>(cfg, "gain").value_or(is_g1 ? "both" : "exact");
  if (gain != "exact" && gain != "capped" && gain != "both") {
    throw ConfigError("key 'gain': expected exact, capped or both");
  }

  const auto spec = is_g1 ? PotentialSpec::g1(F, s, n) : PotentialSpec::g2(F);
  const auto grid = is_g1 ? g1_grid(n, params) : g2_band_grid(n, spec);
  const auto direction = is_g1 ? DriftDirection::AtLeast : DriftDirection::AtMost;
  std::vector<DriftReport> reports;
  if (gain != "capped") reports.push_back(drift_grid_check(spec, params, n, grid, threshold, direction, GainMode::Exact, true));
  if (gain != "exact") {
    reports.push_back(drift_grid_check(spec, params, n, grid, threshold, direction, GainMode::CappedGain, true));
  }

  json effective = cfg;
  effective["s"] = s;
  effective["threshold"] = threshold;
  effective["gain"] = gain;
  OutputSet outputs("drift-check", effective, 0, rt);
  std::vector<std::string> notes = {is_g1 ? "check: drift >= threshold at every state"
                                          : "check: drift <= threshold at every state in the band"};
  if (!is_g1) {
    const auto [lo, hi] = g2_band(n);
    notes.push_back(fmt::format("band: {} < g2 < {} (lower edge 0.84n + 2.2 ln(4.5)^2)", lo, hi));
  }
  outputs.write(fmt::format("drift_{}.csv", potential), "drift_check", notes, [&](std::ostream& os) {
    write_drift_header(os);
    for (const auto& r : reports) write_drift_rows(os, potential, n, r);
  });

  json results = json::array();
  for (const auto& r : reports) {
    json item = {{"gain", r.mode == GainMode::Exact ? "exact" : "capped"},
                 {"status", std::string(to_string(r.status))},
                 {"states", r.states},
                 {"violations", r.violations.size()}};
    if (r.extreme) {
      item[is_g1 ? "min_drift" : "max_drift"] = r.extreme->drift;
      item["at_i"] = r.extreme->i;
      item["at_lambda"] = r.extreme->lambda_real;
    }
    results.push_back(item);
  }
  *rt.out << json{{"command", "drift-check"}, {"potential", potential}, {"n", n},         {"threshold", threshold},
                  {"results", results},        {"outputs", outputs.written()}}
                 .dump()
          << '\n';
  return kExitOk;
}

int cmd_bounds(const json& cfg, const Runtime& rt) {
  const auto ns = get<std::vector<int>>(cfg, "n");
  const int lambda_max = positive_int(cfg, "lambda_max");
  const auto rows = get<std::string>(cfg, "rows");
  if (rows != "violations" && rows != "all") throw ConfigError("key 'rows': expected violations or all");
  std::vector<std::int64_t> lambdas;
  for (int l = 1; l <= lambda_max; ++l) lambdas.push_back(l);
  BoundReport report;
  for (int n : ns) {
    if (n < 2) throw ConfigError("key 'n': bounds need n >= 2");
    merge_into(report, check_bounds(n, lambdas, rows == "all"));
  }
  OutputSet outputs("bounds-check", cfg, 0, rt);
  const std::vector<std::string> notes = {
      "each row checks exact_side <= bound_side (or bound chain) with absolute slack 1e-12",
      "log in the lambda >= 5 forward-drift bound is log2"};
  outputs.write("bounds_summary.csv", "bounds_summary", notes,
                [&](std::ostream& os) { write_bound_summary(os, report); });
  outputs.write("bounds_report.csv", "bounds_report", notes, [&](std::ostream& os) { write_bound_rows(os, report); });
  json per_bound = json::object();
  for (const auto& s : report.summaries) per_bound[s.bound] = s.violations;
  *rt.out << json{{"command", "bounds-check"}, {"violations", report.violations()}, {"by_bound", per_bound},
                  {"outputs", outputs.written()}}
                 .dump()
          << '\n';
  return kExitOk;
}

int cmd_bound(const json& cfg, const Runtime& rt) {
  const int n = positive_int(cfg, "n");
  const int a = positive_int(cfg, "a", 0);
  const int b = cfg.at("b").is_null() ? n : positive_int(cfg, "b", 0);
  const double value =
      elitist_runtime_bound(n, a, b, get<double>(cfg, "F"), get<double>(cfg, "s"), get<double>(cfg, "lambda0"));
  json result = {{"command", "bound"}, {"n", n}, {"a", a}, {"b", b}, {"value", value}};
  const std::filesystem::path dir = get<std::string>(cfg, "out");
  auto os = open_output(dir, "bound.json");
  json doc = result;
  doc["config"] = header_config("bound", cfg);
  os << doc.dump(2) << '\n';
  result["outputs"] = json::array({(dir / "bound.json").string()});
  *rt.out << result.dump() << '\n';
  return kExitOk;
}

json load_config_file(const std::string& path) {
  if (path.empty()) return json();
  std::ifstream in(path);
  if (!in) throw ConfigError(fmt::format("cannot read config file '{}'", path));
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError(fmt::format("config file '{}': {}", path, e.what()));
  }
}

std::vector<std::string> flag_names(const std::string& key) {
  std::vector<std::string> names = {"--" + key};
  std::string dashed = key;
  std::replace(dashed.begin(), dashed.end(), '_', '-');
  if (dashed != key) names.push_back("--" + dashed);
  if (key == "algorithm") names.push_back("--algo");
  if (key == "function") names.push_back("--fn");
  return names;
}

}  // namespace

int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Self-adjusting (1,lambda) EA laboratory: simulations, exact ONEMAX oracles and figure tables"};
  app.require_subcommand(1, 1);

  struct Common {
    std::string config_path;
    std::string preset;
    bool full_scale = false;
    bool no_timestamp = false;
    bool quiet = false;
    int workers = 0;
  };
  std::map<std::string, Common> common;
  std::map<std::string, std::map<std::string, std::string>> raw;
  std::map<std::string, std::map<std::string, CLI::Option*>> options;

  static const std::map<std::string, std::string> descriptions = {
      {"run", "one seeded run; writes run.csv"},
      {"batch", "seeded runs over n x (F, s) cells; writes fig2_boxstats.csv and per-run summaries"},
      {"sweep", "mean normalized generations over s with bootstrap intervals; writes fig3_sweep.csv"},
      {"fixed-target", "level-traced batch; writes fig4/fig5/fig6 tables and ratchet_report.csv"},
      {"drift-check", "exact potential drift over a state grid (g1 or g2)"},
      {"bounds-check", "exact ONEMAX level quantities against the closed-form bounds"},
      {"bound", "closed-form expected-evaluation bound of the elitist variant"}};

  for (const auto& cmd : commands()) {
    auto* sub = app.add_subcommand(cmd, descriptions.at(cmd));
    auto& c = common[cmd];
    sub->add_option("--config", c.config_path, "flat JSON config file (flags override its keys)");
    if (cmd == "batch" || cmd == "sweep" || cmd == "fixed-target") {
      sub->add_option("--paper-preset", c.preset, "fig2, fig3, fig4, fig5 or fig6");
      sub->add_flag("--full-scale", c.full_scale, "use the full run counts of the preset");
      sub->add_option("--workers", c.workers, "worker threads (default: available parallelism)");
      sub->add_flag("--quiet", c.quiet, "no progress on standard error");
    }
    sub->add_flag("--no-timestamp", c.no_timestamp, "omit the timestamp header line");
    for (const auto& key : schema(cmd)) {
      std::string names;
      for (const auto& n : flag_names(key.name)) names += (names.empty() ? "" : ",") + n;
      options[cmd][key.name] = sub->add_option(names, raw[cmd][key.name], key.help);
    }
  }

  std::vector<const char*> argv;
  argv.push_back("selfadj");
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitConfig;
  }

  const auto* sub = app.get_subcommands().front();
  const std::string cmd = sub->get_name();
  const auto& c = common[cmd];
  Runtime rt;
  rt.workers = c.workers;
  rt.timestamp = !c.no_timestamp;
  rt.quiet = c.quiet;
  rt.out = &out;
  rt.err = &err;

  try {
    if (c.workers < 0) throw ConfigError("--workers must be >= 0");
    std::vector<std::pair<std::string, std::string>> flags;
    for (const auto& [key, opt] : options[cmd]) {
      if (opt->count() > 0) flags.emplace_back(key, raw[cmd][key]);
    }
    const json cfg = resolve_config(cmd, c.preset, c.full_scale, load_config_file(c.config_path), flags);
    if (cmd == "run") return cmd_run(cfg, rt);
    if (cmd == "batch" || cmd == "fixed-target") return cmd_batch(cmd, cfg, rt);
    if (cmd == "sweep") return cmd_sweep(cfg, rt);
    if (cmd == "drift-check") return cmd_drift(cfg, rt);
    if (cmd == "bounds-check") return cmd_bounds(cfg, rt);
    if (cmd == "bound") return cmd_bound(cfg, rt);
    throw ConfigError(fmt::format("unknown subcommand '{}'", cmd));
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::invalid_argument& e) {
    err << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << '\n';
    return kExitInternal;
  }
}

int dispatch(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return dispatch(args, std::cout, std::cerr);
}

}  // namespace selfadj::cli
