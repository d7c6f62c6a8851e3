#include "platoon/io.hpp"

#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>

namespace platoon {

namespace detail {
extern const char* const kReferenceTableCsv;
}

const char* version() { return PLATOON_VERSION; }

namespace {

using nlohmann::json;

template <typename T>
T get_value(const json& v, const std::string& key) {
  try {
    if constexpr (std::is_same_v<T, bool>) {
      if (!v.is_boolean()) throw ConfigError("");
      return v.get<bool>();
    } else if constexpr (std::is_integral_v<T>) {
      if (!v.is_number_integer()) throw ConfigError("");
      return v.get<T>();
    } else {
      if (!v.is_number()) throw ConfigError("");
      return v.get<T>();
    }
  } catch (const std::exception&) {
    throw ConfigError("config key '" + key + "' has the wrong type");
  }
}

}  // namespace

void apply_config(Experiment& exp, const json& flat) {
  if (!flat.is_object()) throw ConfigError("config must be a flat JSON object");
  int n = exp.sim.topo.size();
  double a = exp.sim.topo.left_probability();
  for (const auto& [key, v] : flat.items()) {
    MacParams& mac = exp.sim.mac;
    SwarmParams& sw = exp.swarm;
    PipelineParams& pl = exp.pipeline;
    if (key == "mac.slot_us") mac.slot_us = get_value<double>(v, key);
    else if (key == "mac.sifs_us") mac.sifs_us = get_value<double>(v, key);
    else if (key == "mac.difs_us") mac.difs_us = get_value<double>(v, key);
    else if (key == "mac.ack_bits") mac.ack_bits = get_value<double>(v, key);
    else if (key == "mac.payload_bits") mac.payload_bits = get_value<double>(v, key);
    else if (key == "mac.bitrate_bps") mac.bitrate_bps = get_value<double>(v, key);
    else if (key == "mac.p_error") mac.p_error = get_value<double>(v, key);
    else if (key == "mac.retry_limit") mac.retry_limit = get_value<int>(v, key);
    else if (key == "mac.cw_standard") mac.cw_standard = get_value<int>(v, key);
    else if (key == "mac.cw_lo") mac.cw_lo = get_value<int>(v, key);
    else if (key == "mac.cw_hi") mac.cw_hi = get_value<int>(v, key);
    else if (key == "topo.n") n = get_value<int>(v, key);
    else if (key == "topo.a") a = get_value<double>(v, key);
    else if (key == "sim.window_us") exp.sim.window_us = get_value<double>(v, key);
    else if (key == "sim.warmup_us") exp.sim.warmup_us = get_value<double>(v, key);
    else if (key == "swarm.m") sw.m = get_value<int>(v, key);
    else if (key == "swarm.c1") sw.c1 = get_value<double>(v, key);
    else if (key == "swarm.c2") sw.c2 = get_value<double>(v, key);
    else if (key == "swarm.w") sw.w = get_value<double>(v, key);
    else if (key == "swarm.dcw_max") sw.dcw_max = get_value<double>(v, key);
    else if (key == "swarm.iter_limit") sw.iter_limit = get_value<int>(v, key);
    else if (key == "swarm.per_component_random") sw.per_component_random = get_value<bool>(v, key);
    else if (key == "pipeline.d_avg_factor") pl.d_avg_factor = get_value<double>(v, key);
    else if (key == "pipeline.balance_rms_frac") pl.balance_rms_frac = get_value<double>(v, key);
    else if (key == "pipeline.replications") pl.replications = get_value<int>(v, key);
    else if (key == "seed") exp.sim.seed = get_value<std::uint64_t>(v, key);
    else throw ConfigError("unknown config key '" + key + "'");
  }
  try {
    exp.sim.topo = Topology(n, a);
    exp.sim.active_mask.clear();
    exp.swarm.cw_lo = exp.sim.mac.cw_lo;
    exp.swarm.cw_hi = exp.sim.mac.cw_hi;
    exp.validate();
  } catch (const InvalidArgument& e) {
    throw ConfigError(e.what());
  }
}

void load_config_file(Experiment& exp, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  json flat;
  try {
    flat = json::parse(in, nullptr, true, /*ignore_comments=*/true);
  } catch (const json::parse_error& e) {
    throw ConfigError("config file '" + path + "' is not valid JSON: " + e.what());
  }
  apply_config(exp, flat);
}

json config_to_json(const Experiment& exp) {
  const MacParams& mac = exp.sim.mac;
  const SwarmParams& sw = exp.swarm;
  const PipelineParams& pl = exp.pipeline;
  return json{
      {"mac.slot_us", mac.slot_us},
      {"mac.sifs_us", mac.sifs_us},
      {"mac.difs_us", mac.difs_us},
      {"mac.ack_bits", mac.ack_bits},
      {"mac.payload_bits", mac.payload_bits},
      {"mac.bitrate_bps", mac.bitrate_bps},
      {"mac.p_error", mac.p_error},
      {"mac.retry_limit", mac.retry_limit},
      {"mac.cw_standard", mac.cw_standard},
      {"mac.cw_lo", mac.cw_lo},
      {"mac.cw_hi", mac.cw_hi},
      {"topo.n", exp.sim.topo.size()},
      {"topo.a", exp.sim.topo.left_probability()},
      {"sim.window_us", exp.sim.window_us},
      {"sim.warmup_us", exp.sim.warmup_us},
      {"swarm.m", sw.m},
      {"swarm.c1", sw.c1},
      {"swarm.c2", sw.c2},
      {"swarm.w", sw.w},
      {"swarm.dcw_max", sw.dcw_max},
      {"swarm.iter_limit", sw.iter_limit},
      {"swarm.per_component_random", sw.per_component_random},
      {"pipeline.d_avg_factor", pl.d_avg_factor},
      {"pipeline.balance_rms_frac", pl.balance_rms_frac},
      {"pipeline.replications", pl.replications},
      {"seed", exp.sim.seed},
  };
}

CwCombination parse_cw(const std::string& text) {
  std::vector<int> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    std::size_t used = 0;
    int v = 0;
    try {
      v = std::stoi(item, &used);
    } catch (const std::exception&) {
      throw InvalidArgument("malformed CW list '" + text + "'");
    }
    if (used != item.size()) throw InvalidArgument("malformed CW list '" + text + "'");
    out.push_back(v);
  }
  if (out.empty() || (!text.empty() && text.back() == ',')) throw InvalidArgument("malformed CW list '" + text + "'");
  return CwCombination(std::move(out));
}

std::string format_cw(const CwCombination& cw, char sep) {
  std::string s;
  for (std::size_t i = 0; i < cw.size(); ++i) {
    if (i) s += sep;
    s += std::to_string(cw[i]);
  }
  return s;
}

json report_to_json(const MetricsReport& r) {
  return json{{"one_hop_delay_us", r.delays},
              {"avg_delay_us", r.avg_delay_us},
              {"throughput_bps", r.throughput_bps},
              {"tx_probability", r.tx_probability},
              {"e2e_delay_us", r.e2e_delay_us}};
}

namespace {

json trace_to_json(const std::vector<TraceRecord>& trace) {
  json out = json::array();
  for (const TraceRecord& t : trace) {
    out.push_back({{"iteration", t.iteration}, {"gbest_value", t.gbest_value}, {"gbest_cw", t.gbest.values()}});
  }
  return out;
}

}  // namespace

json result_to_json(const OptimizationResult& r, const Experiment& exp) {
  return json{{"software", "platoon-cw"},
              {"version", version()},
              {"config", config_to_json(exp)},
              {"n", r.n},
              {"d_avg_target_us", r.d_avg_target_us},
              {"d_star_us", r.d_star_us},
              {"step_a_cw", r.step_a_cw.values()},
              {"optimal_cw", r.optimal_cw.values()},
              {"balanced_delays_us", r.balanced_delays},
              {"baseline_cw", r.baseline_cw.values()},
              {"baseline_report", report_to_json(r.baseline_report)},
              {"optimized_report", report_to_json(r.optimized_report)},
              {"step_a_trace", trace_to_json(r.step_a_trace)},
              {"step_b_trace", trace_to_json(r.step_b_trace)}};
}

void write_report_csv(std::ostream& os, const MetricsReport& r) {
  os << std::setprecision(10);
  os << "vehicle,one_hop_delay_ms,throughput_mbps,tx_probability,e2e_ms\n";
  for (std::size_t i = 0; i < r.delays.size(); ++i) {
    os << i + 1 << ',' << r.delays[i] / 1000.0 << ',' << r.throughput_bps[i] / 1e6 << ',' << r.tx_probability[i]
       << ',' << r.e2e_delay_us[i] / 1000.0 << '\n';
  }
}

void write_comparison_csv(std::ostream& os, const OptimizationResult& r) {
  const MetricsReport& b = r.baseline_report;
  const MetricsReport& o = r.optimized_report;
  os << std::setprecision(10);
  os << "vehicle,cw_optimal,cw_standard,delay_optimal_ms,delay_standard_ms,e2e_optimal_ms,e2e_standard_ms,"
        "throughput_optimal_mbps,throughput_standard_mbps,tx_probability_optimal,tx_probability_standard\n";
  for (std::size_t i = 0; i < o.delays.size(); ++i) {
    os << i + 1 << ',' << r.optimal_cw[i] << ',' << r.baseline_cw[i] << ',' << o.delays[i] / 1000.0 << ','
       << b.delays[i] / 1000.0 << ',' << o.e2e_delay_us[i] / 1000.0 << ',' << b.e2e_delay_us[i] / 1000.0 << ','
       << o.throughput_bps[i] / 1e6 << ',' << b.throughput_bps[i] / 1e6 << ',' << o.tx_probability[i] << ','
       << b.tx_probability[i] << '\n';
  }
}

void write_trace_csv(std::ostream& os, const std::vector<TraceRecord>& trace) {
  os << std::setprecision(12);
  os << "iteration,gbest_objective_us2,gbest_cw\n";
  for (const TraceRecord& t : trace) os << t.iteration << ',' << t.gbest_value << ',' << format_cw(t.gbest) << '\n';
}

const std::vector<ReferenceRow>& reference_table() {
  static const std::vector<ReferenceRow> rows = [] {
    std::vector<ReferenceRow> out;
    std::stringstream ss(detail::kReferenceTableCsv);
    std::string line;
    std::getline(ss, line);  // header
    while (std::getline(ss, line)) {
      if (line.empty()) continue;
      const auto comma = line.find(',');
      ReferenceRow row;
      row.n = std::stoi(line.substr(0, comma));
      std::stringstream cells(line.substr(comma + 1));
      std::string cell;
      while (std::getline(cells, cell, ';')) row.cw.push_back(std::stoi(cell));
      out.push_back(std::move(row));
    }
    return out;
  }();
  return rows;
}

}  // namespace platoon
