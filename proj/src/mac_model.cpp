#include "platoon/mac_model.hpp"

#include <cmath>
#include <string>

namespace platoon {

namespace {

void require(bool ok, const std::string& what) {
  if (!ok) throw InvalidArgument("MacParams: " + what);
}

}  // namespace

void MacParams::validate() const {
  require(std::isfinite(slot_us) && slot_us > 0, "slot_us must be positive");
  require(std::isfinite(sifs_us) && sifs_us > 0, "sifs_us must be positive");
  require(std::isfinite(difs_us) && difs_us > 0, "difs_us must be positive");
  require(std::isfinite(ack_bits) && ack_bits > 0, "ack_bits must be positive");
  require(std::isfinite(payload_bits) && payload_bits >= 0, "payload_bits must be non-negative");
  require(std::isfinite(bitrate_bps) && bitrate_bps > 0, "bitrate_bps must be positive");
  require(p_error >= 0.0 && p_error <= 1.0, "p_error must lie in [0, 1]");
  require(retry_limit >= 0 && retry_limit <= 30, "retry_limit must lie in [0, 30]");
  require(cw_lo >= 1 && cw_lo <= cw_hi, "require 1 <= cw_lo <= cw_hi");
  require(cw_standard >= cw_lo && cw_standard <= cw_hi, "cw_standard must lie in [cw_lo, cw_hi]");
}

std::int64_t contention_window(int stage, int w0, int retry_limit) {
  if (w0 < 1) throw InvalidArgument("contention_window: w0 must be >= 1");
  if (stage < 0 || stage > retry_limit) {
    throw InvalidArgument("contention_window: invalid stage " + std::to_string(stage) +
                          " (retry limit " + std::to_string(retry_limit) + ")");
  }
  return static_cast<std::int64_t>(w0) << stage;
}

FrameDurations frame_durations(const MacParams& p) {
  p.validate();
  FrameDurations d;
  d.t_data_us = p.payload_bits / p.bitrate_bps * 1e6;
  d.t_ack_us = p.ack_bits / p.bitrate_bps * 1e6;
  d.t_success_us = d.t_data_us + p.sifs_us + d.t_ack_us + p.difs_us;
  // The sender gives up after the ACK timeout (SIFS + ACK), so a failed
  // exchange spans the same time as a successful one.
  d.t_fail_us = d.t_data_us + p.sifs_us + d.t_ack_us + p.difs_us;
  return d;
}

}  // namespace platoon
