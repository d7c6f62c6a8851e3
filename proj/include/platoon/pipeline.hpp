#pragma once

#include <map>
#include <memory>
#include <mutex>
#include <stdexcept>
#include <string>
#include <vector>

#include "platoon/chain_sim.hpp"
#include "platoon/metrics.hpp"
#include "platoon/swarm.hpp"

namespace platoon {

/// A configuration that cannot produce a meaningful experiment.
class ConfigError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

struct PipelineParams {
  /// Step-A goal = factor x smallest average delay of the uniform-CW sweep.
  double d_avg_factor = 0.8;
  /// Stop once the per-vehicle RMS deviation from the goal falls below this
  /// fraction of the goal.
  double balance_rms_frac = 0.05;
  /// Simulation replications (common random numbers) per evaluation.
  int replications = 3;
  std::vector<int> sweep_windows{4, 8, 16, 32, 64};
};

enum class Profile { Full, Fast };

struct Experiment {
  SimConfig sim;  // sim.seed is the master seed
  SwarmParams swarm;
  PipelineParams pipeline;
  int jobs = 1;

  void validate() const;
};

/// Table defaults with the simulation budget of the chosen profile.
Experiment default_experiment(Profile profile = Profile::Full);
void apply_profile(Experiment& exp, Profile profile);

/// Evaluates CW vectors with a fixed set of replication seeds, so every
/// evaluation of the same vector returns the same outcome. Results are cached;
/// safe for concurrent use.
class CrnEvaluator {
public:
  CrnEvaluator(SimConfig base, int replications);

  SimOutcome outcome(const CwCombination& cw) const;
  DelayVector delays(const CwCombination& cw) const { return delay_vector(outcome(cw)); }
  Evaluator evaluator() const;

  std::uint64_t replication_seed(int r) const;
  std::size_t cache_size() const;

private:
  SimConfig base_;
  int replications_;
  struct Cache {
    std::mutex mutex;
    std::map<CwCombination, SimOutcome> entries;
  };
  std::shared_ptr<Cache> cache_;
};

struct OptimizationResult {
  int n = 0;
  double d_avg_target_us = 0.0;
  double d_star_us = 0.0;
  CwCombination step_a_cw;
  CwCombination optimal_cw;
  DelayVector balanced_delays;
  std::vector<TraceRecord> step_a_trace;
  std::vector<TraceRecord> step_b_trace;
  CwCombination baseline_cw;
  MetricsReport baseline_report;
  MetricsReport optimized_report;
};

/// Observer hook per optimization step ('A' or 'B').
using StepObserver = std::function<void(char step, const SwarmState&)>;

/// factor x the smallest average delay over uniform-CW vectors.
double choose_d_avg(const Experiment& exp, const Evaluator& eval);

struct StepAResult {
  double d_star_us = 0.0;
  SwarmResult swarm;
};

StepAResult step_a(const Experiment& exp, const Evaluator& eval, double d_avg_us,
                   const SwarmObserver& observer = {});
SwarmResult step_b(const Experiment& exp, const Evaluator& eval, double d_star_us,
                   const SwarmObserver& observer = {});

OptimizationResult two_step_optimize(const Experiment& exp, const StepObserver& observer = {});

struct SweepRow {
  int n = 0;
  OptimizationResult result;
  double baseline_e2e_us = 0.0;
  double optimized_e2e_us = 0.0;
};

/// Runs the two-step optimisation for every chain length (even, >= 4).
std::vector<SweepRow> sweep_n(const Experiment& templ, const std::vector<int>& n_list);

/// End-to-end delay from the first to the last vehicle at the standard CW.
double baseline_e2e(const Experiment& templ, int n);

/// Smallest n in the list whose baseline end-to-end delay exceeds limit_us,
/// or 0 when none does.
int first_exceeding(const std::vector<SweepRow>& rows, double limit_us);

}  // namespace platoon
