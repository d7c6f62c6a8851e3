#pragma once

#include <vector>

#include "platoon/chain_sim.hpp"

namespace platoon {

/// One-hop delay per vehicle, microseconds. A vehicle without a single
/// delivered packet carries +infinity.
using DelayVector = std::vector<double>;

/// Raised when a metric is undefined for the supplied counters.
class UndefinedMetric : public std::domain_error {
public:
  using std::domain_error::domain_error;
};

struct MetricsReport {
  DelayVector delays;
  double avg_delay_us = 0.0;
  std::vector<double> throughput_bps;
  std::vector<double> tx_probability;
  /// e2e_delay_us[i]: sum of one-hop delays from vehicle 0 up to vehicle i.
  std::vector<double> e2e_delay_us;
};

/// D = T / x. Throws UndefinedMetric when nothing was delivered.
double one_hop_delay(const NodeStats& stats);

/// Sum of squared deviations from target (not normalised by n).
double objective(const DelayVector& delays, double target_us);

double one_hop_throughput(const NodeStats& stats, double payload_bits, double window_us);

/// tx_starts / (tx_starts + decision_slots).
double transmission_probability(const NodeStats& stats);

/// Sum of the one-hop delays of vehicles 0..i-1; zero for vehicle 0.
double end_to_end_delay(const DelayVector& delays, int i);

/// Delays with +infinity in place of undefined entries.
DelayVector delay_vector(const SimOutcome& outcome);

MetricsReport make_report(const SimOutcome& outcome, double payload_bits);

double mean(const std::vector<double>& values);

/// Sample standard deviation over the mean.
double coefficient_of_variation(const std::vector<double>& values);

}  // namespace platoon
