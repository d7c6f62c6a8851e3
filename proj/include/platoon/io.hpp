#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "platoon/pipeline.hpp"

namespace platoon {

const char* version();

/// Applies a flat key/value object ("mac.slot_us": 13, ...) on top of `exp`.
/// Unknown keys and mistyped values raise ConfigError.
void apply_config(Experiment& exp, const nlohmann::json& flat);
void load_config_file(Experiment& exp, const std::string& path);
nlohmann::json config_to_json(const Experiment& exp);

/// Parses "64,64,16" into a combination; throws InvalidArgument when malformed.
CwCombination parse_cw(const std::string& text);
std::string format_cw(const CwCombination& cw, char sep = ';');

nlohmann::json report_to_json(const MetricsReport& r);
nlohmann::json result_to_json(const OptimizationResult& r, const Experiment& exp);

/// vehicle, one_hop_delay_ms, throughput_mbps, tx_probability, e2e_ms
void write_report_csv(std::ostream& os, const MetricsReport& r);

/// Per-vehicle optimised-vs-standard comparison (CW, delay, e2e, throughput, tx probability).
void write_comparison_csv(std::ostream& os, const OptimizationResult& r);

void write_trace_csv(std::ostream& os, const std::vector<TraceRecord>& trace);

struct ReferenceRow {
  int n = 0;
  std::vector<int> cw;
};

/// Bundled reference table of published optimal windows, n = 4..24.
const std::vector<ReferenceRow>& reference_table();

}  // namespace platoon
