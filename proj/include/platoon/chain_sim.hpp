#pragma once

#include <compare>
#include <cstdint>
#include <initializer_list>
#include <vector>

#include "platoon/mac_model.hpp"

namespace platoon {

class Rng;

/// Per-vehicle minimum contention windows, one entry per backbone vehicle.
class CwCombination {
public:
  CwCombination() = default;
  explicit CwCombination(std::vector<int> windows) : windows_(std::move(windows)) {}
  CwCombination(std::initializer_list<int> windows) : windows_(windows) {}

  static CwCombination uniform(int n, int w) { return CwCombination(std::vector<int>(n, w)); }

  std::size_t size() const { return windows_.size(); }
  int operator[](std::size_t i) const { return windows_[i]; }
  int& operator[](std::size_t i) { return windows_[i]; }
  const std::vector<int>& values() const { return windows_; }
  auto begin() const { return windows_.begin(); }
  auto end() const { return windows_.end(); }

  auto operator<=>(const CwCombination&) const = default;

private:
  std::vector<int> windows_;
};

/// Linear chain of backbone vehicles 0..n-1. Each vehicle hears (and can
/// reach) only its immediate neighbours, so vehicles two hops apart are
/// hidden from each other.
class Topology {
public:
  /// a: probability that an interior vehicle addresses its left neighbour.
  Topology(int n, double a);

  int size() const { return n_; }
  double left_probability() const { return a_; }

  /// Vehicles that node i senses; identical to its communication range.
  std::vector<int> sense(int i) const;
  bool in_range(int i, int j) const { return i != j && (i - j == 1 || j - i == 1); }

private:
  int n_;
  double a_;
};

struct SimConfig {
  MacParams mac;
  Topology topo{6, 0.5};
  double window_us = 2e6;
  double warmup_us = 1e6;
  std::uint64_t seed = 1;
  /// Saturated vehicles; empty means every vehicle.
  std::vector<bool> active_mask;

  void validate() const;
  bool is_active(int i) const { return active_mask.empty() || active_mask[i]; }
};

struct NodeStats {
  /// Measurement duration credited to the vehicle (T in D = T / x).
  double busy_window_us = 0.0;
  /// Channel time spent in its own frame exchanges, successful or not.
  double airtime_us = 0.0;
  std::int64_t successes = 0;
  std::int64_t attempts = 0;
  std::int64_t collisions = 0;
  std::int64_t channel_errors = 0;
  std::int64_t drops = 0;
  /// Idle backoff slots in which the vehicle decremented its counter.
  std::int64_t decision_slots = 0;
  std::int64_t tx_starts = 0;

  NodeStats& operator+=(const NodeStats& other);
  bool operator==(const NodeStats&) const = default;
};

struct SimOutcome {
  std::vector<NodeStats> per_node;
  double window_us = 0.0;

  bool operator==(const SimOutcome&) const = default;
};

/// Destination of a fresh packet from node i: the left neighbour with
/// probability a, otherwise the right one. End vehicles always address their
/// only neighbour.
int sample_destination(int i, const Topology& topo, Rng& rng);

/// Simulates cfg.warmup_us + cfg.window_us of saturated DCF traffic on the
/// chain and returns the counters collected after the warmup. Deterministic
/// for a fixed (cfg, cw).
SimOutcome run_simulation(const SimConfig& cfg, const CwCombination& cw);

/// Sums counters of replicated runs of the same chain.
SimOutcome merge_outcomes(const std::vector<SimOutcome>& runs);

}  // namespace platoon
