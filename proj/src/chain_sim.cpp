#include "platoon/chain_sim.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "platoon/random.hpp"

namespace platoon {

Topology::Topology(int n, double a) : n_(n), a_(a) {
  if (n < 2) throw InvalidArgument("Topology: need at least 2 vehicles, got " + std::to_string(n));
  if (!(a >= 0.0 && a <= 1.0)) throw InvalidArgument("Topology: a must lie in [0, 1]");
}

std::vector<int> Topology::sense(int i) const {
  std::vector<int> out;
  if (i > 0) out.push_back(i - 1);
  if (i + 1 < n_) out.push_back(i + 1);
  return out;
}

void SimConfig::validate() const {
  mac.validate();
  if (!(window_us > 0.0) || !std::isfinite(window_us)) throw InvalidArgument("SimConfig: window_us must be positive");
  if (!(warmup_us >= 0.0) || !std::isfinite(warmup_us)) throw InvalidArgument("SimConfig: warmup_us must be >= 0");
  if (!active_mask.empty()) {
    if (static_cast<int>(active_mask.size()) != topo.size()) {
      throw InvalidArgument("SimConfig: active_mask length does not match vehicle count");
    }
    if (std::none_of(active_mask.begin(), active_mask.end(), [](bool b) { return b; })) {
      throw InvalidArgument("SimConfig: active_mask selects no vehicle");
    }
  }
}

NodeStats& NodeStats::operator+=(const NodeStats& o) {
  busy_window_us += o.busy_window_us;
  airtime_us += o.airtime_us;
  successes += o.successes;
  attempts += o.attempts;
  collisions += o.collisions;
  channel_errors += o.channel_errors;
  drops += o.drops;
  decision_slots += o.decision_slots;
  tx_starts += o.tx_starts;
  return *this;
}

int sample_destination(int i, const Topology& topo, Rng& rng) {
  const int n = topo.size();
  if (n < 2) throw InvalidArgument("sample_destination: invalid topology");
  if (i < 0 || i >= n) throw InvalidArgument("sample_destination: vehicle index out of range");
  if (i == 0) return 1;
  if (i == n - 1) return n - 2;
  return rng.bernoulli(topo.left_probability()) ? i - 1 : i + 1;
}

namespace {

using Tick = std::int64_t;  // nanoseconds
constexpr Tick kNever = std::numeric_limits<Tick>::max();

Tick to_ticks(double us) { return static_cast<Tick>(std::llround(us * 1000.0)); }

enum class Phase { Inactive, Contend, Transmit, AwaitAck };

struct Station {
  Phase phase = Phase::Inactive;
  int w0 = 1;
  int stage = 0;
  std::int64_t counter = 0;
  int dest = -1;
  Tick entered = 0;
  Tick idle_since = 0;
  int busy = 0;  // transmitters heard, itself included
  Tick fire = kNever;

  Tick tx_end = kNever;
  bool tx_is_ack = false;
  int tx_to = -1;
  bool tx_corrupt = false;

  Tick await_end = kNever;
  bool exchange_ok = false;
  Tick ack_start = kNever;
  int ack_to = -1;

  Rng rng{0};
  NodeStats stats;
};

class ChainSimulator {
public:
  ChainSimulator(const SimConfig& cfg, const CwCombination& cw)
      : cfg_(cfg),
        slot_(to_ticks(cfg.mac.slot_us)),
        sifs_(to_ticks(cfg.mac.sifs_us)),
        difs_(to_ticks(cfg.mac.difs_us)),
        warmup_(to_ticks(cfg.warmup_us)),
        horizon_(to_ticks(cfg.warmup_us) + to_ticks(cfg.window_us)) {
    const FrameDurations fd = frame_durations(cfg.mac);
    data_ = to_ticks(fd.t_data_us);
    ack_ = to_ticks(fd.t_ack_us);
    exchange_us_ = fd.t_data_us + cfg.mac.sifs_us + fd.t_ack_us;

    const int n = cfg.topo.size();
    stations_.resize(n);
    for (int i = 0; i < n; ++i) {
      Station& s = stations_[i];
      s.w0 = cw[i];
      s.rng = Rng(derive_seed(cfg.seed, "station", static_cast<std::uint64_t>(i)));
    }
    for (int i = 0; i < n; ++i) {
      if (!cfg.is_active(i)) continue;
      new_packet(i);
      begin_contention(i, 0);
    }
  }

  SimOutcome run() {
    const int n = static_cast<int>(stations_.size());
    std::vector<int> starters;
    while (true) {
      Tick t = kNever;
      for (const Station& s : stations_) {
        t = std::min({t, s.tx_end, s.await_end, s.ack_start, s.fire});
      }
      if (t >= horizon_) break;

      for (int i = 0; i < n; ++i) {
        if (stations_[i].tx_end == t) end_transmission(i, t);
      }
      for (int i = 0; i < n; ++i) {
        if (stations_[i].await_end == t) finish_exchange(i, t);
      }

      // Every transmission starting at t is set up before anyone senses it,
      // so counters expiring in the same slot all fire.
      starters.clear();
      for (int i = 0; i < n; ++i) {
        Station& s = stations_[i];
        if (s.fire == t) {
          start_data(i, t);
          starters.push_back(i);
        } else if (s.ack_start == t) {
          start_ack(i, t);
          starters.push_back(i);
        }
      }
      for (int x : starters) {
        for (int y = 0; y < n; ++y) {
          if (y == x || stations_[y].tx_end == kNever) continue;
          interfere(x, y);
          interfere(y, x);
        }
      }
      for (int x : starters) {
        mark_busy(x, t);
        for (int j : cfg_.topo.sense(x)) mark_busy(j, t);
      }
    }

    SimOutcome out;
    out.window_us = cfg_.window_us;
    out.per_node.reserve(stations_.size());
    for (Station& s : stations_) {
      s.stats.busy_window_us = cfg_.window_us;
      out.per_node.push_back(s.stats);
    }
    return out;
  }

private:
  bool measuring(Tick t) const { return t >= warmup_; }

  Tick base(const Station& s) const { return std::max(s.idle_since, s.entered); }

  void schedule(Station& s) {
    if (s.phase == Phase::Contend && s.busy == 0) {
      s.fire = base(s) + difs_ + s.counter * slot_;
    } else {
      s.fire = kNever;
    }
  }

  void new_packet(int i) {
    Station& s = stations_[i];
    s.stage = 0;
    s.dest = sample_destination(i, cfg_.topo, s.rng);
  }

  void begin_contention(int i, Tick t) {
    Station& s = stations_[i];
    s.phase = Phase::Contend;
    s.entered = t;
    const auto window = contention_window(s.stage, s.w0, cfg_.mac.retry_limit);
    s.counter = static_cast<std::int64_t>(s.rng.below(static_cast<std::uint64_t>(window)));
    schedule(s);
  }

  // Medium turned busy for station j: an interrupted slot does not count.
  void mark_busy(int j, Tick t) {
    Station& s = stations_[j];
    if (s.busy++ != 0) return;
    if (s.phase != Phase::Contend || s.fire == kNever) return;
    const Tick counting_from = base(s) + difs_;
    if (t > counting_from) {
      const std::int64_t done = (t - counting_from) / slot_;
      s.counter -= done;
      if (measuring(t)) s.stats.decision_slots += done;
    }
    s.fire = kNever;
  }

  void mark_idle(int j, Tick t) {
    Station& s = stations_[j];
    if (--s.busy != 0) return;
    s.idle_since = t;
    schedule(s);
  }

  void start_data(int i, Tick t) {
    Station& s = stations_[i];
    if (measuring(t)) s.stats.decision_slots += s.counter;
    s.counter = 0;
    s.fire = kNever;
    s.phase = Phase::Transmit;
    s.tx_end = t + data_;
    s.tx_is_ack = false;
    s.tx_to = s.dest;
    s.tx_corrupt = false;
  }

  void start_ack(int i, Tick t) {
    Station& s = stations_[i];
    if (s.tx_end != kNever) throw std::logic_error("chain simulator: receiver busy at ACK time");
    s.ack_start = kNever;
    s.tx_end = t + ack_;
    s.tx_is_ack = true;
    s.tx_to = s.ack_to;
  }

  // A transmission by `source` overlapping the data frame of `victim`.
  void interfere(int source, int victim) {
    Station& v = stations_[victim];
    if (v.tx_is_ack) return;
    const int d = v.tx_to;
    if (source == d || cfg_.topo.in_range(source, d)) v.tx_corrupt = true;
  }

  void end_transmission(int i, Tick t) {
    Station& s = stations_[i];
    s.tx_end = kNever;
    mark_idle(i, t);
    for (int j : cfg_.topo.sense(i)) mark_idle(j, t);
    if (s.tx_is_ack) return;

    bool ok = false;
    const bool collided = s.tx_corrupt;
    bool channel_error = false;
    if (!collided) {
      channel_error = s.rng.bernoulli(cfg_.mac.p_error);
      ok = !channel_error;
    }
    if (measuring(t)) {
      NodeStats& st = s.stats;
      ++st.attempts;
      ++st.tx_starts;
      st.airtime_us += exchange_us_;
      if (ok) ++st.successes;
      if (collided) ++st.collisions;
      if (channel_error) ++st.channel_errors;
      if (!ok && s.stage == cfg_.mac.retry_limit) ++st.drops;
    }
    s.phase = Phase::AwaitAck;
    s.exchange_ok = ok;
    s.await_end = t + sifs_ + ack_;
    if (ok) {
      Station& d = stations_[s.dest];
      d.ack_start = t + sifs_;
      d.ack_to = i;
    }
  }

  void finish_exchange(int i, Tick t) {
    Station& s = stations_[i];
    s.await_end = kNever;
    if (s.exchange_ok || s.stage == cfg_.mac.retry_limit) {
      new_packet(i);
    } else {
      ++s.stage;
    }
    begin_contention(i, t);
  }

  const SimConfig& cfg_;
  Tick slot_, sifs_, difs_, warmup_, horizon_;
  Tick data_ = 0, ack_ = 0;
  double exchange_us_ = 0.0;
  std::vector<Station> stations_;
};

}  // namespace

SimOutcome run_simulation(const SimConfig& cfg, const CwCombination& cw) {
  cfg.validate();
  const int n = cfg.topo.size();
  if (static_cast<int>(cw.size()) != n) {
    throw InvalidArgument("run_simulation: CW vector has " + std::to_string(cw.size()) +
                          " entries for " + std::to_string(n) + " vehicles");
  }
  for (int w : cw) {
    if (w < cfg.mac.cw_lo || w > cfg.mac.cw_hi) {
      throw InvalidArgument("run_simulation: CW " + std::to_string(w) + " outside [" +
                            std::to_string(cfg.mac.cw_lo) + ", " + std::to_string(cfg.mac.cw_hi) + "]");
    }
  }
  if (cfg.window_us < frame_durations(cfg.mac).t_success_us) {
    throw InvalidArgument("run_simulation: window shorter than one frame exchange");
  }
  ChainSimulator sim(cfg, cw);
  return sim.run();
}

SimOutcome merge_outcomes(const std::vector<SimOutcome>& runs) {
  if (runs.empty()) throw InvalidArgument("merge_outcomes: nothing to merge");
  SimOutcome total = runs.front();
  for (std::size_t r = 1; r < runs.size(); ++r) {
    if (runs[r].per_node.size() != total.per_node.size()) {
      throw InvalidArgument("merge_outcomes: runs disagree on vehicle count");
    }
    for (std::size_t i = 0; i < total.per_node.size(); ++i) total.per_node[i] += runs[r].per_node[i];
    total.window_us += runs[r].window_us;
  }
  return total;
}

}  // namespace platoon
