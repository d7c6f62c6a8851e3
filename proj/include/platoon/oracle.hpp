#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "platoon/chain_sim.hpp"
#include "platoon/swarm.hpp"

namespace platoon {

/// Expected measurement window per delivered packet for a lone saturated
/// sender (no contention), from the renewal argument over retry stages.
/// Returns +infinity when no packet can ever be delivered (p_error == 1).
double analytic_single_sender_delay(const MacParams& p, int w0);

/// Per-attempt collision probability of vehicle 0 in a two-vehicle chain
/// without channel errors, from the exact stationary distribution of the
/// contention-round Markov chain over (stage, counter) pairs of both vehicles.
double two_node_collision_probability(const MacParams& p, int w0_first, int w0_second);

inline constexpr std::int64_t kGridLimit = 100000;

struct GridSpec {
  /// Candidate minimum windows per vehicle.
  std::vector<std::vector<int>> candidates;
  double target_us = 0.0;

  std::int64_t combinations() const;
};

struct GridRow {
  CwCombination cw;
  double objective = 0.0;
  double mean_delay_us = 0.0;
};

struct GridResult {
  CwCombination best;
  double best_value = 0.0;
  /// Every evaluated combination, lexicographic order.
  std::vector<GridRow> rows;
};

/// Exhaustive search; ties resolve to the lexicographically smallest vector.
/// Throws InvalidArgument when the space exceeds kGridLimit combinations.
GridResult grid_search(const GridSpec& spec, const Evaluator& evaluator, int jobs = 1);

/// cw (semicolon separated), objective_us2, mean_delay_ms
void write_grid_csv(std::ostream& os, const GridResult& result);

}  // namespace platoon
