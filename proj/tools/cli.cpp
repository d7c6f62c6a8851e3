#include "cli.hpp"

#include <chrono>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <thread>

#include <CLI11.hpp>

#include "platoon/io.hpp"
#include "platoon/oracle.hpp"

namespace platoon::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

const char* profile_name(Profile p) { return p == Profile::Fast ? "fast" : "full"; }

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  std::ostringstream os;
  os << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return os.str();
}

/// Collects a command's files in a staging directory and moves them into
/// place only once everything has been written.
class OutputDir {
public:
  OutputDir(const CommonOptions& opts) : target_(opts.out_dir), staging_(opts.out_dir + ".partial") {
    if (target_.empty()) throw UsageError("no output directory given");
    if (fs::exists(target_) && !fs::is_empty(target_) && !opts.force) {
      throw UsageError("output directory '" + target_.string() + "' is not empty; pass --force to overwrite");
    }
    fs::remove_all(staging_);
    fs::create_directories(staging_);
  }
  OutputDir(const OutputDir&) = delete;
  OutputDir& operator=(const OutputDir&) = delete;
  ~OutputDir() {
    if (!committed_) {
      std::error_code ec;
      fs::remove_all(staging_, ec);
    }
  }

  std::ofstream open(const std::string& name) {
    std::ofstream os(staging_ / name, std::ios::binary);
    if (!os) throw std::runtime_error("cannot write " + (staging_ / name).string());
    return os;
  }

  void write_json(const std::string& name, const json& doc) { open(name) << doc.dump(2) << '\n'; }

  void commit() {
    fs::remove_all(target_);
    if (target_.has_parent_path()) fs::create_directories(target_.parent_path());
    fs::rename(staging_, target_);
    committed_ = true;
  }

private:
  fs::path target_;
  fs::path staging_;
  bool committed_ = false;
};

void write_manifest(OutputDir& out, const CommonOptions& opts, const Experiment& exp) {
  out.write_json("manifest.json", json{{"command", opts.command},
                                       {"config_path", opts.config_path},
                                       {"master_seed", exp.sim.seed},
                                       {"output_dir", opts.out_dir},
                                       {"profile", profile_name(opts.profile)},
                                       {"timestamp", utc_timestamp()},
                                       {"version", version()},
                                       {"config", config_to_json(exp)}});
}

json outcome_to_json(const SimOutcome& o) {
  json nodes = json::array();
  for (const NodeStats& s : o.per_node) {
    nodes.push_back({{"busy_window_us", s.busy_window_us},
                     {"airtime_us", s.airtime_us},
                     {"successes", s.successes},
                     {"attempts", s.attempts},
                     {"collisions", s.collisions},
                     {"channel_errors", s.channel_errors},
                     {"drops", s.drops},
                     {"decision_slots", s.decision_slots},
                     {"tx_starts", s.tx_starts}});
  }
  return json{{"window_us", o.window_us}, {"per_node", nodes}};
}

std::vector<int> parse_int_list(const std::string& text, const std::string& what) {
  try {
    return parse_cw(text).values();
  } catch (const InvalidArgument&) {
    throw UsageError("malformed " + what + " list '" + text + "'");
  }
}

}  // namespace

Experiment build_experiment(const CommonOptions& opts) {
  Experiment exp = default_experiment(opts.profile);
  if (!opts.config_path.empty()) load_config_file(exp, opts.config_path);
  if (opts.seed) exp.sim.seed = *opts.seed;
  exp.jobs = opts.jobs;
  try {
    exp.validate();
  } catch (const InvalidArgument& e) {
    throw ConfigError(e.what());
  }
  return exp;
}

void cmd_simulate(const CommonOptions& opts, const std::string& cw_text) {
  const Experiment exp = build_experiment(opts);
  CwCombination cw;
  try {
    cw = parse_cw(cw_text);
  } catch (const InvalidArgument& e) {
    throw UsageError(e.what());
  }
  const int n = exp.sim.topo.size();
  if (static_cast<int>(cw.size()) != n) {
    throw UsageError("--cw has " + std::to_string(cw.size()) + " entries but the chain has " + std::to_string(n) +
                     " vehicles");
  }
  for (int w : cw) {
    if (w < exp.sim.mac.cw_lo || w > exp.sim.mac.cw_hi) {
      throw UsageError("--cw entry " + std::to_string(w) + " outside the window bounds");
    }
  }
  OutputDir out(opts);
  const CrnEvaluator crn(exp.sim, exp.pipeline.replications);
  const SimOutcome outcome = crn.outcome(cw);
  const MetricsReport report = make_report(outcome, exp.sim.mac.payload_bits);
  {
    auto os = out.open("per_node.csv");
    write_report_csv(os, report);
  }
  out.write_json("summary.json", json{{"version", version()},
                                      {"cw", cw.values()},
                                      {"report", report_to_json(report)},
                                      {"counters", outcome_to_json(outcome)},
                                      {"config", config_to_json(exp)}});
  write_manifest(out, opts, exp);
  out.commit();
  std::cout << "mean one-hop delay " << report.avg_delay_us / 1000.0 << " ms, e2e "
            << report.e2e_delay_us.back() / 1000.0 << " ms -> " << opts.out_dir << '\n';
}

void cmd_optimize(const CommonOptions& opts) {
  const Experiment exp = build_experiment(opts);
  OutputDir out(opts);
  const OptimizationResult r = two_step_optimize(exp);
  out.write_json("result.json", result_to_json(r, exp));
  {
    auto os = out.open("comparison.csv");
    write_comparison_csv(os, r);
  }
  {
    auto os = out.open("optimized.csv");
    write_report_csv(os, r.optimized_report);
  }
  {
    auto os = out.open("baseline.csv");
    write_report_csv(os, r.baseline_report);
  }
  {
    auto os = out.open("trace_step_a.csv");
    write_trace_csv(os, r.step_a_trace);
  }
  {
    auto os = out.open("trace_step_b.csv");
    write_trace_csv(os, r.step_b_trace);
  }
  write_manifest(out, opts, exp);
  out.commit();
  std::cout << "optimal CW " << format_cw(r.optimal_cw, ',') << ", mean one-hop delay "
            << r.optimized_report.avg_delay_us / 1000.0 << " ms (standard "
            << r.baseline_report.avg_delay_us / 1000.0 << " ms) -> " << opts.out_dir << '\n';
}

void cmd_sweep(const CommonOptions& opts, const std::vector<int>& n_list) {
  if (n_list.empty()) throw UsageError("empty --n list");
  for (int n : n_list) {
    if (n < 4 || n % 2 != 0) {
      throw UsageError("n = " + std::to_string(n) +
                       " rejected: each platoon contributes two backbone vehicles, so n must be even and >= 4");
    }
  }
  const Experiment exp = build_experiment(opts);
  OutputDir out(opts);
  const std::vector<SweepRow> rows = sweep_n(exp, n_list);

  auto reference = [](int n) -> std::string {
    for (const ReferenceRow& r : reference_table()) {
      if (r.n == n) return format_cw(CwCombination(r.cw));
    }
    return "";
  };
  {
    auto os = out.open("table2.csv");
    os << std::setprecision(10);
    os << "n,optimal_cw,reference_cw,optimized_e2e_ms,baseline_e2e_ms,d_star_ms\n";
    for (const SweepRow& r : rows) {
      os << r.n << ',' << format_cw(r.result.optimal_cw) << ',' << reference(r.n) << ','
         << r.optimized_e2e_us / 1000.0 << ',' << r.baseline_e2e_us / 1000.0 << ',' << r.result.d_star_us / 1000.0
         << '\n';
    }
  }
  constexpr double kDelayLimitUs = 100e3;
  {
    auto os = out.open("fig4.csv");
    os << std::setprecision(10);
    os << "n,baseline_e2e_ms,optimized_e2e_ms,baseline_exceeds_100ms\n";
    for (const SweepRow& r : rows) {
      os << r.n << ',' << r.baseline_e2e_us / 1000.0 << ',' << r.optimized_e2e_us / 1000.0 << ','
         << (r.baseline_e2e_us > kDelayLimitUs ? 1 : 0) << '\n';
    }
  }
  json results = json::array();
  for (const SweepRow& r : rows) results.push_back(result_to_json(r.result, exp));
  const int crossing = first_exceeding(rows, kDelayLimitUs);
  out.write_json("sweep.json", json{{"version", version()},
                                    {"n_list", n_list},
                                    {"first_n_exceeding_100ms", crossing == 0 ? json(nullptr) : json(crossing)},
                                    {"results", results}});
  write_manifest(out, opts, exp);
  out.commit();
  std::cout << rows.size() << " sweep rows -> " << opts.out_dir << '\n';
}

void cmd_oracle(const CommonOptions& opts, const std::string& candidates, std::optional<double> target_us) {
  const Experiment exp = build_experiment(opts);
  const std::vector<int> values = parse_int_list(candidates, "candidate");
  GridSpec spec;
  spec.candidates.assign(static_cast<std::size_t>(exp.sim.topo.size()), values);
  if (spec.combinations() > kGridLimit) {
    throw UsageError("grid of " + std::to_string(values.size()) + "^" + std::to_string(exp.sim.topo.size()) +
                     " combinations exceeds the enumeration limit of " + std::to_string(kGridLimit));
  }
  for (int w : values) {
    if (w < exp.sim.mac.cw_lo || w > exp.sim.mac.cw_hi) {
      throw UsageError("candidate " + std::to_string(w) + " outside the window bounds");
    }
  }
  OutputDir out(opts);
  const CrnEvaluator crn(exp.sim, exp.pipeline.replications);
  const Evaluator eval = crn.evaluator();
  spec.target_us = target_us ? *target_us : choose_d_avg(exp, eval);
  const GridResult r = grid_search(spec, eval, exp.jobs);
  {
    auto os = out.open("grid.csv");
    os << std::setprecision(12);
    write_grid_csv(os, r);
  }
  {
    auto os = out.open("best.csv");
    os << std::setprecision(12);
    GridResult best_only;
    for (const GridRow& row : r.rows) {
      if (row.cw == r.best) best_only.rows.push_back(row);
    }
    write_grid_csv(os, best_only);
  }
  write_manifest(out, opts, exp);
  out.commit();
  std::cout << "best " << format_cw(r.best, ',') << " objective " << r.best_value << " over " << r.rows.size()
            << " combinations -> " << opts.out_dir << '\n';
}

int run_cli(const std::vector<std::string>& args) {
  CLI::App app{"Contention-window optimisation for inter-platoon DCF chains", "platoon"};
  app.require_subcommand(1);
  app.set_version_flag("--version", version());

  CommonOptions opts;
  opts.jobs = std::max(1u, std::thread::hardware_concurrency());
  std::string profile = "full";
  std::uint64_t seed = 0;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("-c,--config", opts.config_path, "flat JSON config (keys like mac.slot_us, topo.n)")
        ->check(CLI::ExistingFile);
    sub->add_option("--seed", seed, "master seed (overrides the config)");
    sub->add_option("-o,--out", opts.out_dir, std::string("output directory (default: $") + kOutputDirEnv +
                                                  " or ./platoon-out)");
    sub->add_option("--profile", profile, "simulation budget")->check(CLI::IsMember({"full", "fast"}));
    sub->add_option("-j,--jobs", opts.jobs, "worker threads")->check(CLI::PositiveNumber);
    sub->add_flag("--force", opts.force, "replace a non-empty output directory");
  };

  std::string cw_text;
  auto* simulate = app.add_subcommand("simulate", "simulate one CW vector and report per-vehicle metrics");
  add_common(simulate);
  simulate->add_option("--cw", cw_text, "comma separated minimum windows, one per vehicle")->required();

  auto* optimize = app.add_subcommand("optimize", "two-step swarm optimisation of the minimum windows");
  add_common(optimize);

  std::string n_text = "4,6,8,10,12,14,16,18,20,22,24";
  auto* sweep = app.add_subcommand("sweep", "optimise every chain length and compare with the reference table");
  add_common(sweep);
  sweep->add_option("--n", n_text, "comma separated even chain lengths");

  std::string candidates = "8,16,32,64";
  double target = 0.0;
  auto* oracle = app.add_subcommand("oracle", "exhaustive grid search over a small candidate set");
  add_common(oracle);
  oracle->add_option("--candidates", candidates, "comma separated candidate windows, shared by every vehicle");
  auto* target_opt = oracle->add_option("--target-us", target, "objective target (default: the step-A goal)");

  std::vector<std::string> argv_rev(args.rbegin(), args.rend());
  try {
    app.parse(argv_rev);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  opts.profile = profile == "fast" ? Profile::Fast : Profile::Full;
  const auto* chosen = app.get_subcommands().front();
  opts.command = chosen->get_name();
  if (chosen->count("--seed")) opts.seed = seed;
  if (opts.out_dir.empty()) {
    const char* env = std::getenv(kOutputDirEnv);
    opts.out_dir = env && *env ? env : "platoon-out";
  }

  try {
    if (chosen == simulate) cmd_simulate(opts, cw_text);
    else if (chosen == optimize) cmd_optimize(opts);
    else if (chosen == sweep) cmd_sweep(opts, parse_int_list(n_text, "n"));
    else cmd_oracle(opts, candidates, target_opt->count() ? std::optional<double>(target) : std::nullopt);
  } catch (const UsageError& e) {
    std::cerr << "platoon " << opts.command << ": " << e.what() << '\n';
    return kUsage;
  } catch (const ConfigError& e) {
    std::cerr << "platoon " << opts.command << ": configuration error: " << e.what() << '\n';
    return kConfig;
  } catch (const std::exception& e) {
    std::cerr << "platoon " << opts.command << ": " << e.what() << '\n';
    return kRuntime;
  }
  return kOk;
}

}  // namespace platoon::cli
