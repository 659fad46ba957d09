#include "selfadj/report.hpp"

#include <chrono>
#include <cmath>

#include <fmt/chrono.h>
#include <fmt/format.h>

namespace selfadj {

std::string config_hash(const nlohmann::json& config) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : config.dump()) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return fmt::format("{:016x}", h);
}

void write_header(std::ostream& os, const OutputHeader& header) {
  os << fmt::format("# kind: {}\n", header.kind);
  os << fmt::format("# config_hash: {}\n", config_hash(header.config));
  os << fmt::format("# master_seed: {}\n", header.master_seed);
  os << fmt::format("# config: {}\n", header.config.dump());
  os << "# log base: every \"log n\" (normalizers, 4 log n, r log n) is log2\n";
  for (const auto& note : header.notes) os << "# " << note << '\n';
  if (header.timestamp) {
    const auto now = std::chrono::time_point_cast<std::chrono::seconds>(std::chrono::system_clock::now());
    os << fmt::format("# generated: {:%Y-%m-%dT%H:%M:%SZ}\n", fmt::gmtime(std::chrono::system_clock::to_time_t(now)));
  }
}

std::string csv_number(double v) {
  if (std::isnan(v)) return "";
  return fmt::format("{}", v);
}

std::string csv_number(const std::optional<double>& v) { return v ? csv_number(*v) : std::string(); }

namespace {

std::string cell_prefix(const Cell& c) {
  return fmt::format("{},{},{},{}", c.algorithm.name(), c.n, csv_number(c.setting.F), csv_number(c.setting.s));
}

}  // namespace

void write_run_rows(std::ostream& os, const RunRecord& rec) {
  os << "run_id,generation,fitness,lambda_real,lambda_int,evaluations,best_so_far\n";
  const auto line = [&](const TraceRow& r) {
    os << fmt::format("{},{},{},{},{},{},{}\n", rec.run_id, r.generation, r.fitness, csv_number(r.lambda_real),
                      r.lambda_int, r.evaluations, r.best_so_far);
  };
  if (!rec.rows.empty()) {
    for (const auto& r : rec.rows) line(r);
    return;
  }
  // Summary trace: the final state only.
  line(TraceRow{rec.generations, rec.final_fitness, rec.final_lambda, round_lambda(rec.final_lambda),
                rec.evaluations, rec.best_so_far});
}

void write_run_summaries(std::ostream& os, const std::vector<const Cell*>& cells) {
  os << "algorithm,n,F,s,run_id,seed,stop_cause,generations,evaluations,initial_fitness,final_fitness,"
        "best_so_far,final_lambda\n";
  for (const Cell* c : cells) {
    const double scale = c->scale;
    for (const auto& r : c->runs) {
      os << fmt::format("{},{},{},{},{},{},{},{},{},{}\n", cell_prefix(*c), r.run_id, r.seed, to_string(r.stop_cause),
                        r.generations, r.evaluations, csv_number(static_cast<double>(r.initial_fitness) / scale),
                        csv_number(static_cast<double>(r.final_fitness) / scale),
                        csv_number(static_cast<double>(r.best_so_far) / scale), csv_number(r.final_lambda));
    }
  }
}

void write_boxstats(std::ostream& os, const std::vector<RuntimeStats>& stats) {
  os << "algorithm,n,F,s,runs,censored,min,q1,median,q3,max,mean\n";
  for (const auto& st : stats) {
    os << fmt::format("{},{},{},{},{},{}", st.algorithm, st.n, csv_number(st.setting.F), csv_number(st.setting.s),
                      st.runs, st.censored);
    if (st.normalized) {
      const auto& s = *st.normalized;
      os << fmt::format(",{},{},{},{},{},{}\n", csv_number(s.min), csv_number(s.q1), csv_number(s.median),
                        csv_number(s.q3), csv_number(s.max), csv_number(s.mean));
    } else {
      os << ",,,,,,\n";
    }
  }
}

void write_sweep(std::ostream& os, const std::vector<SweepRow>& rows) {
  os << "n,F,s,runs,reached_optimum,mean_generations_over_n,ci99_lo,ci99_hi\n";
  for (const auto& r : rows) {
    os << fmt::format("{},{},{},{},{},{},{},{}\n", r.n, csv_number(r.setting.F), csv_number(r.setting.s), r.runs,
                      r.reached, csv_number(r.mean_generations), csv_number(r.ci.lo), csv_number(r.ci.hi));
  }
}

void write_fixed_target(std::ostream& os, const std::vector<const Cell*>& cells) {
  os << "algorithm,n,F,s,target,runs,runs_reached,mean_evaluations,mean_evaluations_reached\n";
  for (const Cell* c : cells) {
    for (const auto& r : fixed_target_table(*c)) {
      os << fmt::format("{},{},{},{},{},{}\n", cell_prefix(*c), csv_number(r.target), r.runs, r.reached,
                        csv_number(r.mean_evaluations), csv_number(r.mean_evaluations_reached));
    }
  }
}

void write_lambda_levels(std::ostream& os, const std::vector<const Cell*>& cells) {
  os << "algorithm,n,F,s,fitness,generations,mean_lambda_int\n";
  for (const Cell* c : cells) {
    for (const auto& r : lambda_per_fitness(*c)) {
      os << fmt::format("{},{},{},{}\n", cell_prefix(*c), csv_number(r.fitness), r.generations,
                        csv_number(r.mean_lambda));
    }
  }
}

void write_eval_histogram(std::ostream& os, const std::vector<const Cell*>& cells) {
  os << "algorithm,n,F,s,fitness,evaluations,percent\n";
  for (const Cell* c : cells) {
    for (const auto& r : evals_per_fitness_histogram(*c)) {
      os << fmt::format("{},{},{},{}\n", cell_prefix(*c), csv_number(r.fitness), r.evaluations,
                        csv_number(r.percent));
    }
  }
}

void write_ratchet(std::ostream& os, const std::vector<const Cell*>& cells, const std::vector<double>& r_values) {
  os << "algorithm,n,F,s,r,runs,runs_with_gap_violations,gap_violations,eligible_generations,drops,drop_fraction\n";
  for (const Cell* c : cells) {
    for (const auto& r : ratchet_monitor(*c, r_values)) {
      os << fmt::format("{},{},{},{},{},{},{},{}\n", cell_prefix(*c), csv_number(r.r), r.runs,
                        r.runs_with_gap_violations, r.gap_violations, r.eligible_generations, r.drops,
                        csv_number(r.drop_fraction));
    }
  }
}

void write_bound_rows(std::ostream& os, const BoundReport& report) {
  os << "n,i,lambda_real,lambda_int,bound,exact_side,bound_side,margin,pass\n";
  for (const auto& r : report.rows) {
    os << fmt::format("{},{},{},{},{},{},{},{},{}\n", r.n, r.i, r.lambda, r.lambda, r.bound, csv_number(r.lhs),
                      csv_number(r.rhs), csv_number(r.margin()), r.pass ? "pass" : "fail");
  }
}

void write_bound_summary(std::ostream& os, const BoundReport& report) {
  os << "bound,checked,violations,worst_margin,worst_n,worst_i,worst_lambda\n";
  for (const auto& s : report.summaries) {
    os << fmt::format("{},{},{},{},{},{},{}\n", s.bound, s.checked, s.violations,
                      s.checked > 0 ? csv_number(s.worst_margin) : std::string(), s.worst_n, s.worst_i,
                      s.worst_lambda);
  }
}

void write_drift_header(std::ostream& os) {
  os << "potential,gain,n,i,lambda_real,lambda_int,potential_value,drift,threshold,margin,pass\n";
}

void write_drift_rows(std::ostream& os, const std::string& potential, int n, const DriftReport& report) {
  const char* gain = report.mode == GainMode::Exact ? "exact" : "capped";
  const bool at_least = report.direction == DriftDirection::AtLeast;
  for (const auto& r : report.rows) {
    const double margin = at_least ? r.drift - report.threshold : report.threshold - r.drift;
    os << fmt::format("{},{},{},{},{},{},{},{},{},{},{}\n", potential, gain, n, r.i, csv_number(r.lambda_real), r.lambda_int,
                      csv_number(r.potential), csv_number(r.drift), csv_number(report.threshold),
                      csv_number(margin), r.pass ? "pass" : "fail");
  }
}

}  // namespace selfadj
