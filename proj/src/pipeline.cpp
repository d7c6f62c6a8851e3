#include "platoon/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "platoon/random.hpp"

namespace platoon {

void Experiment::validate() const {
  sim.validate();
  swarm.validate();
  if (!(pipeline.d_avg_factor > 0.0)) throw InvalidArgument("pipeline.d_avg_factor must be positive");
  if (!(pipeline.balance_rms_frac >= 0.0)) throw InvalidArgument("pipeline.balance_rms_frac must be >= 0");
  if (pipeline.replications < 1) throw InvalidArgument("pipeline.replications must be >= 1");
  if (jobs < 1) throw InvalidArgument("jobs must be >= 1");
}

void apply_profile(Experiment& exp, Profile profile) {
  if (profile == Profile::Full) {
    exp.sim.window_us = 2e6;
    exp.swarm.iter_limit = 300;
  } else {
    exp.sim.window_us = 0.5e6;
    exp.swarm.iter_limit = 60;
  }
}

Experiment default_experiment(Profile profile) {
  Experiment exp;
  exp.sim.topo = Topology(6, 0.5);
  exp.sim.warmup_us = 1e6;
  apply_profile(exp, profile);
  return exp;
}

CrnEvaluator::CrnEvaluator(SimConfig base, int replications)
    : base_(std::move(base)), replications_(replications), cache_(std::make_shared<Cache>()) {
  base_.validate();
  if (replications < 1) throw InvalidArgument("CrnEvaluator: need at least one replication");
}

std::uint64_t CrnEvaluator::replication_seed(int r) const {
  return derive_seed(base_.seed, "replication", static_cast<std::uint64_t>(r));
}

SimOutcome CrnEvaluator::outcome(const CwCombination& cw) const {
  {
    std::lock_guard lock(cache_->mutex);
    auto it = cache_->entries.find(cw);
    if (it != cache_->entries.end()) return it->second;
  }
  std::vector<SimOutcome> runs;
  runs.reserve(replications_);
  for (int r = 0; r < replications_; ++r) {
    SimConfig cfg = base_;
    cfg.seed = replication_seed(r);
    runs.push_back(run_simulation(cfg, cw));
  }
  SimOutcome merged = merge_outcomes(runs);
  std::lock_guard lock(cache_->mutex);
  return cache_->entries.emplace(cw, std::move(merged)).first->second;
}

Evaluator CrnEvaluator::evaluator() const {
  return [self = *this](const CwCombination& cw) { return self.delays(cw); };
}

std::size_t CrnEvaluator::cache_size() const {
  std::lock_guard lock(cache_->mutex);
  return cache_->entries.size();
}

namespace {

SwarmParams bounded(const Experiment& exp, double target_us) {
  SwarmParams p = exp.swarm;
  p.cw_lo = exp.sim.mac.cw_lo;
  p.cw_hi = exp.sim.mac.cw_hi;
  const double rms = exp.pipeline.balance_rms_frac * target_us;
  p.threshold = static_cast<double>(exp.sim.topo.size()) * rms * rms;
  return p;
}

}  // namespace

double choose_d_avg(const Experiment& exp, const Evaluator& eval) {
  const int n = exp.sim.topo.size();
  double best = std::numeric_limits<double>::infinity();
  bool any = false;
  for (int w : exp.pipeline.sweep_windows) {
    if (w < exp.sim.mac.cw_lo || w > exp.sim.mac.cw_hi) continue;
    any = true;
    const DelayVector d = eval(CwCombination::uniform(n, w));
    if (std::any_of(d.begin(), d.end(), [](double x) { return !std::isfinite(x); })) {
      throw ConfigError("choose_d_avg: a vehicle delivered no packet with uniform CW " + std::to_string(w));
    }
    best = std::min(best, mean(d));
  }
  if (!any) throw ConfigError("choose_d_avg: no sweep window lies inside the CW bounds");
  return exp.pipeline.d_avg_factor * best;
}

StepAResult step_a(const Experiment& exp, const Evaluator& eval, double d_avg_us, const SwarmObserver& observer) {
  Rng rng(derive_seed(exp.sim.seed, "step-a"));
  StepAResult r;
  r.swarm = run_swarm(exp.sim.topo.size(), d_avg_us, eval, bounded(exp, d_avg_us), rng, exp.jobs, observer);
  r.d_star_us = mean(r.swarm.gbest_delays);
  return r;
}

SwarmResult step_b(const Experiment& exp, const Evaluator& eval, double d_star_us, const SwarmObserver& observer) {
  Rng rng(derive_seed(exp.sim.seed, "step-b"));
  return run_swarm(exp.sim.topo.size(), d_star_us, eval, bounded(exp, d_star_us), rng, exp.jobs, observer);
}

OptimizationResult two_step_optimize(const Experiment& exp, const StepObserver& observer) {
  exp.validate();
  const CrnEvaluator crn(exp.sim, exp.pipeline.replications);
  const Evaluator eval = crn.evaluator();
  auto hook = [&](char step) -> SwarmObserver {
    if (!observer) return {};
    return [&observer, step](const SwarmState& s) { observer(step, s); };
  };

  OptimizationResult out;
  out.n = exp.sim.topo.size();
  out.d_avg_target_us = choose_d_avg(exp, eval);

  StepAResult a = step_a(exp, eval, out.d_avg_target_us, hook('A'));
  if (!std::isfinite(a.d_star_us)) throw ConfigError("step A found no combination delivering on every vehicle");
  out.d_star_us = a.d_star_us;
  out.step_a_cw = a.swarm.gbest;
  out.step_a_trace = std::move(a.swarm.trace);

  SwarmResult b = step_b(exp, eval, out.d_star_us, hook('B'));
  out.optimal_cw = b.gbest;
  out.balanced_delays = b.gbest_delays;
  out.step_b_trace = std::move(b.trace);

  const double payload = exp.sim.mac.payload_bits;
  out.baseline_cw = CwCombination::uniform(out.n, exp.sim.mac.cw_standard);
  out.baseline_report = make_report(crn.outcome(out.baseline_cw), payload);
  out.optimized_report = make_report(crn.outcome(out.optimal_cw), payload);
  return out;
}

namespace {

Experiment with_n(const Experiment& templ, int n) {
  if (n < 4 || n % 2 != 0) {
    throw InvalidArgument("sweep: n = " + std::to_string(n) +
                          " rejected; every platoon contributes two backbone vehicles, so n must be even and >= 4");
  }
  Experiment exp = templ;
  exp.sim.topo = Topology(n, templ.sim.topo.left_probability());
  exp.sim.active_mask.clear();
  return exp;
}

}  // namespace

double baseline_e2e(const Experiment& templ, int n) {
  const Experiment exp = with_n(templ, n);
  const CrnEvaluator crn(exp.sim, exp.pipeline.replications);
  const DelayVector d = crn.delays(CwCombination::uniform(n, exp.sim.mac.cw_standard));
  return end_to_end_delay(d, n - 1);
}

std::vector<SweepRow> sweep_n(const Experiment& templ, const std::vector<int>& n_list) {
  for (int n : n_list) with_n(templ, n);
  std::vector<SweepRow> rows;
  rows.reserve(n_list.size());
  for (int n : n_list) {
    SweepRow row;
    row.n = n;
    row.result = two_step_optimize(with_n(templ, n));
    row.baseline_e2e_us = row.result.baseline_report.e2e_delay_us.back();
    row.optimized_e2e_us = row.result.optimized_report.e2e_delay_us.back();
    rows.push_back(std::move(row));
  }
  return rows;
}

int first_exceeding(const std::vector<SweepRow>& rows, double limit_us) {
  for (const SweepRow& r : rows) {
    if (r.baseline_e2e_us > limit_us) return r.n;
  }
  return 0;
}

}  // namespace platoon
