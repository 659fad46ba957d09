#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "selfadj/ea.hpp"
#include "selfadj/experiments.hpp"
#include "selfadj/oracle.hpp"

namespace selfadj {

/// 64-bit FNV-1a of the compact JSON dump, as 16 hex digits.
std::string config_hash(const nlohmann::json& config);

struct OutputHeader {
  std::string kind;  // e.g. "fig2_boxstats"
  nlohmann::json config;
  std::uint64_t master_seed = 0;
  bool timestamp = true;
  std::vector<std::string> notes;
};

/// '#'-prefixed comment lines: kind, config hash, master seed, effective
/// config, notes, and (optionally) a UTC timestamp as the last line.
void write_header(std::ostream& os, const OutputHeader& header);

/// Shortest round-trip representation; empty for missing values.
std::string csv_number(double v);
std::string csv_number(const std::optional<double>& v);

void write_run_rows(std::ostream& os, const RunRecord& rec);
void write_run_summaries(std::ostream& os, const std::vector<const Cell*>& cells);
void write_boxstats(std::ostream& os, const std::vector<RuntimeStats>& stats);
void write_sweep(std::ostream& os, const std::vector<SweepRow>& rows);

/// Per-cell tables, each row prefixed by algorithm, n, F, s.
void write_fixed_target(std::ostream& os, const std::vector<const Cell*>& cells);
void write_lambda_levels(std::ostream& os, const std::vector<const Cell*>& cells);
void write_eval_histogram(std::ostream& os, const std::vector<const Cell*>& cells);
void write_ratchet(std::ostream& os, const std::vector<const Cell*>& cells, const std::vector<double>& r_values);

void write_bound_rows(std::ostream& os, const BoundReport& report);
void write_bound_summary(std::ostream& os, const BoundReport& report);
void write_drift_header(std::ostream& os);
/// Appends report.rows; the gain column tells exact from capped-gain reports.
void write_drift_rows(std::ostream& os, const std::string& potential, int n, const DriftReport& report);

}  // namespace selfadj
