#pragma once

#include "dyntrack/algorithms.hpp"
#include "dyntrack/graph.hpp"
#include "dyntrack/signals.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace dyntrack {

/// Invalid configuration; the message carries the offending line when known.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct TopologySpec {
  std::string kind = "geometric";  // geometric | cycle | complete | edges | file
  int agents = 25;
  double radius = 0.4;
  std::uint64_t seed = 1;
  std::vector<Edge> edges;    // kind == edges
  std::filesystem::path path;  // kind == file
};

struct SignalSpec {
  std::string kind = "decaying_sinusoid_ramp";  // static | decaying_sinusoid_ramp | piecewise_ramp | zero_average | trace
  int dimension = 100;
  std::optional<std::uint64_t> seed;  // defaults to the experiment seed
  double alpha = 0.01;
  double beta = 0.1;
  double gamma = 2.5e-4;
  std::optional<Iteration> flip_iteration;
  double slope = 1e-3;
  double spread = 0.0;
  std::optional<Iteration> hold_iteration;
  std::optional<Eigen::MatrixXd> values;  // static
  std::filesystem::path path;             // trace
};

struct ExperimentConfig {
  TopologySpec topology;
  SignalSpec signal;
  std::vector<AlgorithmSpec> algorithms{AlgorithmSpec{AlgorithmId::Diffusion, 1.0}};
  Iteration iterations = 1000;
  int ensemble_size = 1;
  std::uint64_t seed = 1;
  int record_every = 1;
  int record_entry = -1;  // -1: mean over entries
  std::optional<double> stop_epsilon;
  int dobrushin_trials = 0;  // 0 disables the ergodicity estimate in the summary
  std::filesystem::path output = "out";
};

/// Parses a YAML or JSON document. Unknown keys and bad values raise
/// ConfigError naming the line. Relative paths resolve against `base_dir`.
ExperimentConfig parse_config(const std::string& text, const std::filesystem::path& base_dir = {});
ExperimentConfig load_config(const std::filesystem::path& path);

/// Throws ConfigError when cross-field constraints fail.
void validate(const ExperimentConfig& cfg);

Topology build_topology(const TopologySpec& spec);
SignalModel build_signal(const SignalSpec& spec, int num_agents, std::uint64_t default_seed);

}  // namespace dyntrack
