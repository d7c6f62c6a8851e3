#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <vector>

#include "platoon/chain_sim.hpp"
#include "platoon/metrics.hpp"

namespace platoon {

struct SwarmParams {
  int m = 15;
  double c1 = 1.5;
  double c2 = 1.5;
  double w = 0.8;
  double dcw_max = 10.0;
  int iter_limit = 300;
  double threshold = 0.0;
  int cw_lo = 1;
  int cw_hi = 64;
  /// Draw r1, r2 per component instead of once per particle.
  bool per_component_random = false;

  void validate() const;
};

struct Particle {
  /// Continuous position; its rounding is the combination evaluated.
  std::vector<double> position;
  std::vector<double> velocity;
  CwCombination pbest;
  double pbest_value = std::numeric_limits<double>::infinity();
  CwCombination evaluated;
  double evaluated_value = std::numeric_limits<double>::infinity();
  DelayVector evaluated_delays;
};

struct TraceRecord {
  int iteration = 0;
  double gbest_value = 0.0;
  CwCombination gbest;
};

struct SwarmState {
  std::vector<Particle> particles;
  CwCombination gbest;
  double gbest_value = std::numeric_limits<double>::infinity();
  DelayVector gbest_delays;
  /// 1-based iteration counter.
  int t = 1;
  std::vector<TraceRecord> trace;
};

/// Maps an integer combination to its per-vehicle one-hop delays. Must be
/// deterministic and safe to call from several threads at once.
using Evaluator = std::function<DelayVector(const CwCombination&)>;

/// Called after the best-update of every iteration.
using SwarmObserver = std::function<void(const SwarmState&)>;

struct SwarmResult {
  CwCombination gbest;
  double gbest_value = 0.0;
  DelayVector gbest_delays;
  std::vector<TraceRecord> trace;
  int iterations = 0;
};

/// Rounds a continuous position to the nearest in-bound integer combination.
CwCombination project(const std::vector<double>& position, int cw_lo, int cw_hi);

SwarmState init_swarm(int n, const SwarmParams& params, Rng& rng);

/// Personal/global best bookkeeping for iteration state.t. At t == 1 every
/// personal best is the particle itself; afterwards an entry is replaced only
/// by a strictly smaller value.
void update_bests(SwarmState& state, const std::vector<double>& values,
                  const std::vector<DelayVector>& delays);

/// Velocity and position update. At t == 1 the stored (random) velocity is
/// applied as-is; later iterations use the inertia/cognitive/social rule.
void update_positions(SwarmState& state, const SwarmParams& params, Rng& rng);

/// Objective with +infinity for any undefined delay.
double swarm_objective(const DelayVector& delays, double target_us);

/// Inertia/cognitive/social velocity rule for one component, clamped into
/// [-dcw_max, dcw_max].
double next_velocity(double previous, double position, double global_best, double personal_best, double r1,
                     double r2, const SwarmParams& params);

/// Moves a component by `velocity` and clamps it into [cw_lo, cw_hi].
double next_position(double position, double velocity, const SwarmParams& params);

/// Evaluates `count` independent items on up to `jobs` threads. The first
/// exception thrown by any item is rethrown after all threads join.
void parallel_for(int count, int jobs, const std::function<void(int)>& body);

SwarmResult run_swarm(int n, double target_us, const Evaluator& evaluator, const SwarmParams& params, Rng& rng,
                      int jobs = 1, const SwarmObserver& observer = {});

}  // namespace platoon
