#pragma once

#include <cstdint>
#include <stdexcept>

namespace platoon {

/// Raised when a parameter set or argument violates a documented precondition.
class InvalidArgument : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

/// MAC/PHY constants of the control channel. Defaults are the experiment
/// settings used throughout the project (6 Mbps, 2048-bit packets, 13 us slot).
struct MacParams {
  double slot_us = 13.0;
  double sifs_us = 28.0;
  double difs_us = 54.0;
  double ack_bits = 240.0;
  double payload_bits = 2048.0;
  double bitrate_bps = 6.0e6;
  double p_error = 0.1;
  int retry_limit = 5;
  int cw_standard = 64;
  int cw_lo = 1;
  int cw_hi = 64;

  /// Throws InvalidArgument describing the first violated invariant.
  void validate() const;
};

struct FrameDurations {
  double t_data_us = 0.0;
  double t_ack_us = 0.0;
  /// data + SIFS + ACK + DIFS
  double t_success_us = 0.0;
  /// data + ACK timeout (SIFS + ACK) + DIFS
  double t_fail_us = 0.0;
};

/// Backoff window at retry stage k: w0 * 2^k. The counter is then drawn from
/// [0, W_k - 1]. Throws InvalidArgument when k is outside [0, retry_limit].
std::int64_t contention_window(int stage, int w0, int retry_limit);

FrameDurations frame_durations(const MacParams& p);

}  // namespace platoon
