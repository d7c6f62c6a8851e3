// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any failure.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "cli.hpp"
#include "platoon/chain_sim.hpp"
#include "platoon/io.hpp"
#include "platoon/mac_model.hpp"
#include "platoon/metrics.hpp"
#include "platoon/oracle.hpp"
#include "platoon/pipeline.hpp"
#include "platoon/random.hpp"
#include "platoon/swarm.hpp"

using namespace platoon;
namespace fs = std::filesystem;

namespace {

struct Verdict {
  bool pass = true;
  std::ostringstream detail;
  std::string failures;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      failures += " [failed: " + what + "]";
    }
  }
};

const fs::path& work_dir() {
  static const fs::path dir = [] {
    const fs::path p = fs::current_path() / "acceptance-out";
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
  }();
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

bool near(double a, double b, double tol = 1e-9) { return std::abs(a - b) <= tol * std::max(1.0, std::abs(b)); }

std::string ms(double us) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(2) << us / 1000.0 << " ms";
  return os.str();
}

// ---------------------------------------------------------------- criterion 1

void unit_formulas(Verdict& v) {
  const auto start = std::chrono::steady_clock::now();
  MacParams mac;
  v.require(contention_window(0, 64, mac.retry_limit) == 64, "W_0 = 64");
  v.require(contention_window(0, 1, mac.retry_limit) == 1, "W_0 = 1");
  v.require(contention_window(3, 20, mac.retry_limit) == 160, "W_3 doubling");
  bool threw = false;
  try {
    contention_window(mac.retry_limit + 1, 16, mac.retry_limit);
  } catch (const InvalidArgument&) {
    threw = true;
  }
  v.require(threw, "stage beyond retry limit rejected");

  const FrameDurations fd = frame_durations(mac);
  v.require(near(fd.t_data_us, 2048.0 / 6.0) && near(fd.t_ack_us, 40.0), "frame durations");
  v.require(near(fd.t_success_us, 2048.0 / 6.0 + 28 + 40 + 54), "exchange duration");

  NodeStats s;
  s.busy_window_us = 1e6;
  s.successes = 250;
  v.require(near(one_hop_delay(s), 4000.0), "delay 1e6/250");
  s.successes = 300;
  v.require(near(one_hop_throughput(s, 2048, 1e6), 614400.0), "throughput 300 pkts");
  v.require(objective({3200, 3200, 3200}, 3200) == 0.0, "zero objective");
  v.require(near(objective({3000, 4000}, 3000), 1e6), "objective 1e6");
  v.require(near(end_to_end_delay({3200, 3200, 3200, 3200, 3200, 3200}, 5), 16000.0), "e2e 16 ms");
  v.require(end_to_end_delay({3000, 4000, 3500}, 0) == 0.0, "e2e empty path");
  v.require(near(end_to_end_delay({3000, 4000, 3500}, 2), 7000.0), "e2e partial");
  s.tx_starts = 100;
  s.decision_slots = 9900;
  v.require(near(transmission_probability(s), 0.01), "tx probability");

  SwarmParams sp;
  v.require(near(next_velocity(5, 30, 20, 25, 0.5, 0.5, sp), -7.25), "velocity arithmetic");
  v.require(project({next_position(30, -7.25, sp)}, 1, 64) == CwCombination{23}, "position rounding");
  v.require(next_velocity(0, 10, 10 + 14 / 1.5, 10, 1.0, 0.5, sp) == sp.dcw_max, "velocity clamp +14 -> +10");
  v.require(near(next_velocity(9, 10, 30, 30, 1.0, 1.0, sp), 10.0), "velocity clamp at +10");
  v.require(next_velocity(0, 17, 17, 17, 0.3, 0.9, sp) == 0.0, "fixed point");
  v.require(next_position(63.5, 10, sp) == 64.0 && next_position(1.5, -10, sp) == 1.0, "position clamp");

  SwarmParams three = sp;
  three.m = 3;
  Rng rng(11);
  SwarmState state = init_swarm(2, three, rng);
  update_bests(state, {4, 9, 2}, {{1, 1}, {2, 2}, {3, 3}});
  v.require(state.gbest_value == 2 && state.gbest == state.particles[2].evaluated, "t = 1 global best");
  update_positions(state, three, rng);
  const CwCombination incumbent = state.gbest;
  update_bests(state, {2, 7, 9}, {{1, 1}, {2, 2}, {3, 3}});
  v.require(state.gbest == incumbent, "tie keeps incumbent");
  update_positions(state, three, rng);
  update_bests(state, {1, 7, 9}, {{1, 1}, {2, 2}, {3, 3}});
  v.require(state.gbest_value == 1 && state.gbest == state.particles[0].evaluated, "strict improvement replaces");

  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  v.require(secs < 1.0, "runtime < 1 s");
  v.detail << "formula examples checked in " << std::setprecision(3) << secs * 1000 << " ms";
}

// ---------------------------------------------------------------- criterion 2

void single_sender(Verdict& v) {
  const auto start = std::chrono::steady_clock::now();
  double worst = 0.0;
  for (double pe : {0.0, 0.1}) {
    for (int w0 : {8, 16, 64}) {
      SimConfig cfg;
      cfg.topo = Topology(2, 0.5);
      cfg.mac.p_error = pe;
      cfg.window_us = 10e6;
      cfg.seed = 2024;
      cfg.active_mask = {true, false};
      const SimOutcome out = run_simulation(cfg, CwCombination{w0, w0});
      const double sim = one_hop_delay(out.per_node[0]);
      const double exact = analytic_single_sender_delay(cfg.mac, w0);
      const double err = std::abs(sim - exact) / exact;
      worst = std::max(worst, err);
      v.require(err <= 0.02, "p_e=" + std::to_string(pe) + " w0=" + std::to_string(w0));
      if (pe == 0.0) v.require(out.per_node[0].collisions == 0 && out.per_node[0].drops == 0, "no collisions");
    }
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  v.require(secs < 30.0, "runtime < 30 s");
  v.detail << "six cases, worst relative error " << std::setprecision(3) << worst * 100 << "% (limit 2%), "
           << secs << " s";
}

// ---------------------------------------------------------------- criterion 3

fs::path write_config(const std::string& name, const std::string& body) {
  const fs::path p = work_dir() / name;
  std::ofstream(p) << body;
  return p;
}

void determinism(Verdict& v) {
  const fs::path n4 = write_config("n4.json", "{\"topo.n\": 4}");
  const fs::path n2 = write_config("n2.json", "{\"topo.n\": 2}");
  struct Case {
    std::string name;
    std::vector<std::string> args;
  };
  const std::vector<Case> cases{
      {"simulate", {"simulate", "--cw", "64,40,33,20,50,64", "--seed", "17"}},
      {"optimize", {"optimize", "-c", n4.string(), "--profile", "fast", "--seed", "3"}},
      {"sweep", {"sweep", "-c", n4.string(), "--profile", "fast", "--n", "4"}},
      {"oracle", {"oracle", "-c", n2.string(), "--profile", "fast", "--candidates", "8,16,32"}},
  };
  int files = 0;
  for (const Case& c : cases) {
    std::vector<fs::path> dirs;
    for (const char* jobs : {"1", "3"}) {
      const fs::path dir = work_dir() / ("det-" + c.name + "-j" + jobs);
      std::vector<std::string> args = c.args;
      args.insert(args.end(), {"--jobs", jobs, "--out", dir.string(), "--force"});
      const int rc = cli::run_cli(args);
      v.require(rc == 0, c.name + " exit code " + std::to_string(rc));
      dirs.push_back(dir);
    }
    for (const auto& entry : fs::directory_iterator(dirs[0])) {
      const std::string name = entry.path().filename().string();
      if (name == "manifest.json") continue;  // carries a wall-clock timestamp
      ++files;
      v.require(fs::exists(dirs[1] / name) && slurp(entry.path()) == slurp(dirs[1] / name),
                c.name + "/" + name + " differs");
    }
  }
  v.detail << files << " output files byte-identical between --jobs 1 and --jobs 3 "
           << "(simulate, optimize, sweep, oracle)";
}

// ---------------------------------------------------------------- criterion 4

Experiment six_vehicles(Profile profile) {
  Experiment exp = default_experiment(profile);
  exp.sim.topo = Topology(6, exp.sim.topo.left_probability());
  return exp;
}

bool non_increasing(const std::vector<TraceRecord>& trace) {
  for (std::size_t k = 1; k < trace.size(); ++k) {
    if (trace[k].gbest_value > trace[k - 1].gbest_value) return false;
  }
  return true;
}

void pso_monotonicity(Verdict& v) {
  const Experiment exp = six_vehicles(Profile::Fast);
  double max_speed = 0.0;
  int lo = 64;
  int hi = 1;
  long evaluations = 0;
  const OptimizationResult r = two_step_optimize(exp, [&](char, const SwarmState& s) {
    for (const Particle& p : s.particles) {
      for (double vel : p.velocity) max_speed = std::max(max_speed, std::abs(vel));
      for (int w : p.evaluated.values()) {
        lo = std::min(lo, w);
        hi = std::max(hi, w);
      }
      ++evaluations;
    }
  });
  v.require(non_increasing(r.step_a_trace), "step A trace");
  v.require(non_increasing(r.step_b_trace), "step B trace");
  v.require(max_speed <= exp.swarm.dcw_max, "velocity bound");
  v.require(lo >= 1 && hi <= 64, "CW bounds");
  v.detail << "step A " << r.step_a_trace.size() << " and step B " << r.step_b_trace.size()
           << " iterations non-increasing; max |v| " << std::setprecision(4) << max_speed << ", " << evaluations
           << " evaluated CWs within [" << lo << ", " << hi << "]";
}

// ---------------------------------------------------------------- criterion 5

void oracle_equivalence(Verdict& v) {
  const auto start = std::chrono::steady_clock::now();
  Experiment exp = default_experiment(Profile::Fast);
  exp.sim.topo = Topology(4, exp.sim.topo.left_probability());
  const CrnEvaluator crn(exp.sim, exp.pipeline.replications);
  const Evaluator eval = crn.evaluator();

  const double d_avg = choose_d_avg(exp, eval);
  const StepAResult a = step_a(exp, eval, d_avg);
  GridSpec spec;
  spec.candidates.assign(4, std::vector<int>{8, 16, 32, 64});
  spec.target_us = a.d_star_us;
  const GridResult grid = grid_search(spec, eval, exp.jobs);
  const SwarmResult b = step_b(exp, eval, a.d_star_us);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  v.require(grid.rows.size() == 256, "256 grid rows");
  v.require(b.gbest_value <= 1.05 * grid.best_value, "swarm within 5% of grid minimum");
  v.require(secs < 600.0, "runtime < 10 min");
  v.detail << "target " << ms(a.d_star_us) << "; swarm " << format_cw(b.gbest, ',') << " f=" << std::setprecision(6)
           << b.gbest_value << " vs grid " << format_cw(grid.best, ',') << " f=" << grid.best_value << " (ratio "
           << std::setprecision(3) << b.gbest_value / grid.best_value << ", limit 1.05), " << secs << " s";
}

// ------------------------------------------------------------ criteria 6 - 9

const OptimizationResult& full_six() {
  static const OptimizationResult r = [] {
    const auto start = std::chrono::steady_clock::now();
    OptimizationResult out = two_step_optimize(six_vehicles(Profile::Full));
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::cout << "  full n=6 optimization: " << std::setprecision(4) << secs << " s, optimal CW "
              << format_cw(out.optimal_cw, ',') << ", d* " << ms(out.d_star_us) << '\n';
    return out;
  }();
  return r;
}

void balance(Verdict& v) {
  const OptimizationResult& r = full_six();
  const double cv = coefficient_of_variation(r.optimized_report.delays);
  const double opt = r.optimized_report.avg_delay_us;
  const double base = r.baseline_report.avg_delay_us;
  v.require(cv <= 0.10, "CV <= 0.10");
  v.require(opt >= 1600.0 && opt <= 6400.0, "mean in [1.6, 6.4] ms");
  v.require(opt <= base, "optimized mean <= baseline mean");
  v.detail << "CV " << std::setprecision(3) << cv << " (limit 0.10); mean " << ms(opt) << " (window 1.6-6.4 ms); "
           << "baseline mean " << ms(base);
}

void end_to_end(Verdict& v) {
  const OptimizationResult& r = full_six();
  const auto& opt = r.optimized_report.e2e_delay_us;
  const auto& base = r.baseline_report.e2e_delay_us;
  v.require(opt.back() < base.back(), "optimized e2e < baseline e2e");
  std::vector<double> inc;
  for (std::size_t k = 1; k < opt.size(); ++k) inc.push_back(opt[k] - opt[k - 1]);
  const double m = mean(inc);
  double worst = 0.0;
  for (double x : inc) worst = std::max(worst, std::abs(x - m) / m);
  v.require(worst <= 0.15, "increments within 15% of their mean");
  v.detail << "e2e(1->6) " << ms(opt.back()) << " vs baseline " << ms(base.back()) << "; worst increment deviation "
           << std::setprecision(3) << worst * 100 << "% (limit 15%)";
}

void ordering(Verdict& v) {
  const OptimizationResult& r = full_six();
  const auto& ot = r.optimized_report.throughput_bps;
  const auto& bt = r.baseline_report.throughput_bps;
  const auto& op = r.optimized_report.tx_probability;
  const auto& bp = r.baseline_report.tx_probability;
  v.detail << "throughput ratio opt/base per vehicle:";
  for (std::size_t i = 0; i < ot.size(); ++i) {
    v.detail << ' ' << std::setprecision(3) << ot[i] / bt[i];
    v.require(ot[i] >= 0.95 * bt[i], "throughput vehicle " + std::to_string(i + 1));
  }
  v.detail << " (limit 0.95); tx probability opt/base:";
  for (std::size_t i = 0; i < op.size(); ++i) {
    v.detail << ' ' << std::setprecision(3) << op[i] / bp[i];
    v.require(op[i] > bp[i], "tx probability vehicle " + std::to_string(i + 1));
  }
}

void cw_size(Verdict& v) {
  const OptimizationResult& r = full_six();
  for (int w : r.optimal_cw.values()) v.require(w < 64, "component " + std::to_string(w) + " >= 64");
  v.detail << "optimal CW " << format_cw(r.optimal_cw, ',') << " (all below 64 required)";
}

// --------------------------------------------------------------- criterion 10

void sweep_shape(Verdict& v) {
  const auto start = std::chrono::steady_clock::now();
  const fs::path dir = work_dir() / "sweep";
  const int rc = cli::run_cli({"sweep", "--profile", "fast", "--n", "4,6,8,10,12,14,16,18,20,22,24", "--out",
                               dir.string(), "--force"});
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  v.require(rc == 0, "sweep exit code");
  v.require(secs < 3600.0, "runtime < 1 h");
  if (rc != 0) return;

  std::istringstream fig(slurp(dir / "fig4.csv"));
  std::string line;
  std::getline(fig, line);
  std::vector<double> e2e;
  while (std::getline(fig, line)) {
    const auto a = line.find(',');
    const auto b = line.find(',', a + 1);
    e2e.push_back(std::stod(line.substr(a + 1, b - a - 1)));
  }
  v.require(e2e.size() == 11, "11 rows");
  for (std::size_t k = 1; k < e2e.size(); ++k) v.require(e2e[k] > e2e[k - 1], "baseline e2e increasing");
  const std::string table = slurp(dir / "table2.csv");
  v.require(!table.empty(), "table2.csv emitted");

  std::cout << "  reference-table comparison (" << (dir / "table2.csv").string() << "):\n";
  std::istringstream rows(table);
  while (std::getline(rows, line)) std::cout << "    " << line << '\n';
  v.detail << "baseline e2e " << std::setprecision(4) << e2e.front() << " ms (n=4) to " << e2e.back()
           << " ms (n=24), strictly increasing; " << secs << " s";
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<void(Verdict&)>>> criteria{
      {"unit formulas", unit_formulas},
      {"simulator vs analytic single sender", single_sender},
      {"determinism across --jobs", determinism},
      {"PSO monotonicity and bounds", pso_monotonicity},
      {"swarm vs exhaustive grid (n=4)", oracle_equivalence},
      {"balanced one-hop delay (n=6)", balance},
      {"end-to-end delay (n=6)", end_to_end},
      {"throughput and tx probability ordering (n=6)", ordering},
      {"optimal CW below the standard window (n=6)", cw_size},
      {"sweep shape and reference-table report", sweep_shape},
  };
  int failures = 0;
  for (std::size_t k = 0; k < criteria.size(); ++k) {
    Verdict v;
    try {
      criteria[k].second(v);
    } catch (const std::exception& e) {
      v.pass = false;
      v.failures += std::string(" [exception: ") + e.what() + "]";
    }
    failures += v.pass ? 0 : 1;
    std::cout << (v.pass ? "PASS" : "FAIL") << " criterion " << k + 1 << ": " << criteria[k].first << " -- "
              << v.detail.str() << v.failures << std::endl;
  }
  std::cout << criteria.size() - failures << "/" << criteria.size() << " criteria passed" << std::endl;
  return failures == 0 ? 0 : 1;
}
