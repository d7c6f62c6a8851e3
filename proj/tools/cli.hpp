#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "platoon/pipeline.hpp"

namespace platoon::cli {

enum ExitCode : int { kOk = 0, kUsage = 2, kConfig = 3, kRuntime = 4 };

class UsageError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Environment variable naming the output directory when --out is absent.
inline constexpr const char* kOutputDirEnv = "PLATOON_OUTPUT_DIR";

struct CommonOptions {
  std::string command;
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string out_dir;
  Profile profile = Profile::Full;
  int jobs = 1;
  bool force = false;
};

Experiment build_experiment(const CommonOptions& opts);

void cmd_simulate(const CommonOptions& opts, const std::string& cw_text);
void cmd_optimize(const CommonOptions& opts);
void cmd_sweep(const CommonOptions& opts, const std::vector<int>& n_list);
void cmd_oracle(const CommonOptions& opts, const std::string& candidates, std::optional<double> target_us);

/// Parses arguments, dispatches, and maps failures onto exit codes.
int run_cli(const std::vector<std::string>& args);

}  // namespace platoon::cli
