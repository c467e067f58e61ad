#pragma once

#include "dyntrack/config.hpp"
#include "dyntrack/metrics.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace dyntrack {

/// Worker cap from COORD_SIM_THREADS, else the hardware concurrency.
int default_worker_count();

struct RunOptions {
  std::optional<int> threads;  // overrides COORD_SIM_THREADS
  bool write_files = true;
};

struct AlgorithmSummary {
  AlgorithmSpec algorithm;
  std::filesystem::path csv;
  int scalars_per_iteration = 0;
  std::int64_t total_scalars_sent = 0;  // per agent
  std::vector<Iteration> iterations;    // recorded iterations
  std::vector<double> mean_msd;         // ensemble mean at each recorded iteration
  std::vector<double> mean_max_err;
  std::optional<RateFit> rate;
  std::optional<DobrushinEstimate> dobrushin;
  std::vector<int> frozen_agents;  // per member, when a stop rule is active
};

struct ExperimentResult {
  int num_agents = 0;
  int dimension = 0;
  double lambda = 0.0;
  std::vector<AlgorithmSummary> algorithms;
  std::filesystem::path summary;
};

/// Runs every algorithm over the ensemble and, unless disabled, writes
/// `<label>.csv` per algorithm and `summary.yaml` into cfg.output.
///
/// CSV columns: iter,member,entry,msd,max_err,scalars_sent. One row per
/// recorded iteration and member, plus member = -1 rows holding the ensemble
/// mean when ensemble_size > 1. Iterations 1..I are recorded when divisible
/// by record_every, and I always. entry = -1 reports the mean over entries.
ExperimentResult run_experiment(const ExperimentConfig& cfg, const RunOptions& options = {});

std::vector<std::string> preset_names();

struct PresetOptions {
  std::filesystem::path preset_dir = DYNTRACK_PRESET_DIR;
  std::optional<Iteration> iterations;
  RunOptions run;
};

struct PresetResult {
  std::string name;
  std::vector<std::string> experiment_names;
  std::vector<ExperimentResult> experiments;
  std::filesystem::path manifest;
};

/// Runs the named preset file; each experiment goes to `<output>/<name>/`
/// and `<output>/manifest.yaml` lists them. Unknown names throw ConfigError.
PresetResult run_preset(const std::string& name, const std::filesystem::path& output,
                        const PresetOptions& options = {});

/// Experiments of a preset with the common section merged in.
std::vector<std::pair<std::string, ExperimentConfig>> load_preset(const std::string& name,
                                                                  const std::filesystem::path& preset_dir);

}  // namespace dyntrack
