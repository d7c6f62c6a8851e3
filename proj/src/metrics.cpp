#include "platoon/metrics.hpp"

#include <cmath>
#include <limits>
#include <numeric>
#include <string>

namespace platoon {

double one_hop_delay(const NodeStats& stats) {
  if (stats.successes <= 0) throw UndefinedMetric("one_hop_delay: no packet delivered");
  return stats.busy_window_us / static_cast<double>(stats.successes);
}

double objective(const DelayVector& delays, double target_us) {
  double f = 0.0;
  for (double d : delays) {
    const double dev = d - target_us;
    f += dev * dev;
  }
  return f;
}

double one_hop_throughput(const NodeStats& stats, double payload_bits, double window_us) {
  if (!(window_us > 0.0)) throw InvalidArgument("one_hop_throughput: window must be positive");
  return static_cast<double>(stats.successes) * payload_bits / (window_us * 1e-6);
}

double transmission_probability(const NodeStats& stats) {
  const auto total = stats.tx_starts + stats.decision_slots;
  if (total <= 0) throw UndefinedMetric("transmission_probability: no decision opportunity observed");
  return static_cast<double>(stats.tx_starts) / static_cast<double>(total);
}

double end_to_end_delay(const DelayVector& delays, int i) {
  if (i < 0 || i >= static_cast<int>(delays.size())) {
    throw InvalidArgument("end_to_end_delay: vehicle index " + std::to_string(i) + " out of range");
  }
  return std::accumulate(delays.begin(), delays.begin() + i, 0.0);
}

DelayVector delay_vector(const SimOutcome& outcome) {
  DelayVector d;
  d.reserve(outcome.per_node.size());
  for (const NodeStats& s : outcome.per_node) {
    d.push_back(s.successes > 0 ? one_hop_delay(s) : std::numeric_limits<double>::infinity());
  }
  return d;
}

MetricsReport make_report(const SimOutcome& outcome, double payload_bits) {
  MetricsReport r;
  r.delays = delay_vector(outcome);
  r.avg_delay_us = mean(r.delays);
  for (const NodeStats& s : outcome.per_node) {
    r.throughput_bps.push_back(one_hop_throughput(s, payload_bits, s.busy_window_us));
    r.tx_probability.push_back(s.tx_starts + s.decision_slots > 0 ? transmission_probability(s) : 0.0);
  }
  for (int i = 0; i < static_cast<int>(r.delays.size()); ++i) {
    r.e2e_delay_us.push_back(end_to_end_delay(r.delays, i));
  }
  return r;
}

double mean(const std::vector<double>& values) {
  if (values.empty()) return 0.0;
  return std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
}

double coefficient_of_variation(const std::vector<double>& values) {
  if (values.size() < 2) return 0.0;
  const double m = mean(values);
  double ss = 0.0;
  for (double v : values) ss += (v - m) * (v - m);
  return std::sqrt(ss / static_cast<double>(values.size() - 1)) / m;
}

}  // namespace platoon
