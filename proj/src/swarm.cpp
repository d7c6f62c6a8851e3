#include "platoon/swarm.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <string>
#include <thread>

#include "platoon/random.hpp"

namespace platoon {

void SwarmParams::validate() const {
  if (m < 2) throw InvalidArgument("SwarmParams: need at least 2 particles");
  if (!(c1 >= 0.0) || !(c2 >= 0.0)) throw InvalidArgument("SwarmParams: learning coefficients must be non-negative");
  if (!(w >= 0.0 && w < 1.0)) throw InvalidArgument("SwarmParams: inertia must lie in [0, 1)");
  if (!(dcw_max > 0.0)) throw InvalidArgument("SwarmParams: dcw_max must be positive");
  if (iter_limit < 1) throw InvalidArgument("SwarmParams: iter_limit must be >= 1");
  if (!(threshold >= 0.0)) throw InvalidArgument("SwarmParams: threshold must be >= 0");
  if (cw_lo < 1 || cw_lo > cw_hi) throw InvalidArgument("SwarmParams: require 1 <= cw_lo <= cw_hi");
}

CwCombination project(const std::vector<double>& position, int cw_lo, int cw_hi) {
  std::vector<int> out;
  out.reserve(position.size());
  for (double x : position) {
    const auto r = static_cast<int>(std::lround(x));
    out.push_back(std::clamp(r, cw_lo, cw_hi));
  }
  return CwCombination(std::move(out));
}

SwarmState init_swarm(int n, const SwarmParams& params, Rng& rng) {
  if (n < 2) throw InvalidArgument("init_swarm: need at least 2 vehicles");
  params.validate();
  SwarmState state;
  state.particles.resize(params.m);
  for (Particle& p : state.particles) {
    p.position.resize(n);
    p.velocity.resize(n);
    for (int i = 0; i < n; ++i) p.position[i] = static_cast<double>(rng.between(params.cw_lo, params.cw_hi));
    for (int i = 0; i < n; ++i) p.velocity[i] = rng.unit();
    p.evaluated = project(p.position, params.cw_lo, params.cw_hi);
  }
  return state;
}

void update_bests(SwarmState& state, const std::vector<double>& values, const std::vector<DelayVector>& delays) {
  const std::size_t m = state.particles.size();
  if (values.size() != m || delays.size() != m) {
    throw InvalidArgument("update_bests: expected " + std::to_string(m) + " evaluations, got " +
                          std::to_string(values.size()));
  }
  std::size_t gmin = 0;
  for (std::size_t j = 1; j < m; ++j) {
    if (values[j] < values[gmin]) gmin = j;
  }
  for (std::size_t j = 0; j < m; ++j) {
    Particle& p = state.particles[j];
    p.evaluated_value = values[j];
    p.evaluated_delays = delays[j];
    if (state.t == 1 || values[j] < p.pbest_value) {
      p.pbest = p.evaluated;
      p.pbest_value = values[j];
    }
  }
  if (state.t == 1 || values[gmin] < state.gbest_value) {
    state.gbest = state.particles[gmin].evaluated;
    state.gbest_value = values[gmin];
    state.gbest_delays = delays[gmin];
  }
  state.trace.push_back({state.t, state.gbest_value, state.gbest});
}

double next_velocity(double previous, double position, double global_best, double personal_best, double r1,
                     double r2, const SwarmParams& params) {
  const double v = params.w * previous + params.c1 * r1 * (global_best - position) +
                   params.c2 * r2 * (personal_best - position);
  return std::clamp(v, -params.dcw_max, params.dcw_max);
}

double next_position(double position, double velocity, const SwarmParams& params) {
  return std::clamp(position + velocity, static_cast<double>(params.cw_lo), static_cast<double>(params.cw_hi));
}

void update_positions(SwarmState& state, const SwarmParams& params, Rng& rng) {
  for (Particle& p : state.particles) {
    const std::size_t n = p.position.size();
    double r1 = 0.0;
    double r2 = 0.0;
    if (state.t > 1 && !params.per_component_random) {
      r1 = rng.unit();
      r2 = rng.unit();
    }
    for (std::size_t i = 0; i < n; ++i) {
      double v = p.velocity[i];
      if (state.t > 1) {
        if (params.per_component_random) {
          r1 = rng.unit();
          r2 = rng.unit();
        }
        v = next_velocity(v, p.position[i], state.gbest[i], p.pbest[i], r1, r2, params);
      } else {
        v = std::clamp(v, -params.dcw_max, params.dcw_max);
      }
      p.velocity[i] = v;
      p.position[i] = next_position(p.position[i], v, params);
    }
    p.evaluated = project(p.position, params.cw_lo, params.cw_hi);
  }
  ++state.t;
}

double swarm_objective(const DelayVector& delays, double target_us) {
  for (double d : delays) {
    if (!std::isfinite(d)) return std::numeric_limits<double>::infinity();
  }
  return objective(delays, target_us);
}

void parallel_for(int count, int jobs, const std::function<void(int)>& body) {
  if (count <= 0) return;
  jobs = std::clamp(jobs, 1, count);
  if (jobs == 1) {
    for (int k = 0; k < count; ++k) body(k);
    return;
  }
  std::atomic<int> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    for (int k = next++; k < count; k = next++) {
      try {
        body(k);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next = count;
      }
    }
  };
  std::vector<std::thread> threads;
  threads.reserve(jobs - 1);
  for (int k = 1; k < jobs; ++k) threads.emplace_back(worker);
  worker();
  for (std::thread& t : threads) t.join();
  if (failure) std::rethrow_exception(failure);
}

SwarmResult run_swarm(int n, double target_us, const Evaluator& evaluator, const SwarmParams& params, Rng& rng,
                      int jobs, const SwarmObserver& observer) {
  SwarmState state = init_swarm(n, params, rng);
  const int m = params.m;
  std::vector<DelayVector> delays(m);
  std::vector<double> values(m);
  while (true) {
    parallel_for(m, jobs, [&](int j) {
      delays[j] = evaluator(state.particles[j].evaluated);
      values[j] = swarm_objective(delays[j], target_us);
    });
    update_bests(state, values, delays);
    if (observer) observer(state);
    if (state.gbest_value < params.threshold || state.t >= params.iter_limit) break;
    update_positions(state, params, rng);
  }
  SwarmResult result;
  result.gbest = state.gbest;
  result.gbest_value = state.gbest_value;
  result.gbest_delays = state.gbest_delays;
  result.trace = std::move(state.trace);
  result.iterations = state.t;
  return result;
}

}  // namespace platoon
