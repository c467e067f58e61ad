// coord_sim: command-line driver for the tracking simulations.
//
//   coord_sim simulate --config exp.yaml [--algorithm id] [--agents K] [--dim N]
//                      [--iters I] [--seed S] [--output dir]
//   coord_sim preset fig4 --output dir [--iters I]
//   coord_sim topology gen --kind geometric --agents 25 --radius 0.4 --seed 3
//   coord_sim topology inspect net.yaml
//
// Flags override values from the config file. Exit codes: 0 success, 2 bad
// input, 3 runtime invariant violation, 1 anything else.

#include "dyntrack/errors.hpp"
#include "dyntrack/harness.hpp"

#include <CLI11.hpp>
#include <fmt/format.h>

#include <iostream>

namespace {

using namespace dyntrack;

struct TopologyFlags {
  std::string kind = "geometric";
  int agents = 25;
  double radius = 0.4;
  std::uint64_t seed = 1;
};

void add_topology_flags(CLI::App* cmd, TopologyFlags& flags) {
  cmd->add_option("--kind", flags.kind, "geometric, cycle or complete")
      ->check(CLI::IsMember({"geometric", "cycle", "complete"}));
  cmd->add_option("--agents", flags.agents, "number of agents K");
  cmd->add_option("--radius", flags.radius, "connection radius (geometric)");
  cmd->add_option("--seed", flags.seed, "placement seed (geometric)");
}

Topology make_topology(const TopologyFlags& flags) {
  TopologySpec spec;
  spec.kind = flags.kind;
  spec.agents = flags.agents;
  spec.radius = flags.radius;
  spec.seed = flags.seed;
  return build_topology(spec);
}

void print_inspection(const Topology& t) {
  const auto deg = t.degrees();
  fmt::print("num_agents: {}\n", t.num_agents());
  fmt::print("edges: {}\n", t.edges().size());
  fmt::print("min_degree: {}\n", deg.empty() ? 0 : *std::min_element(deg.begin(), deg.end()));
  fmt::print("max_degree: {}\n", deg.empty() ? 0 : *std::max_element(deg.begin(), deg.end()));
  fmt::print("connected: {}\n", t.is_connected());
  if (!t.is_connected()) return;
  const CombinationMatrix a = metropolis_weights(t);
  fmt::print("primitive: {}\n", is_primitive(a));
  fmt::print("lambda: {:.17g}\n", t.num_agents() == 1 ? 0.0 : second_eigenvalue_magnitude(a));
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Decentralized dynamic-average tracking simulator"};
  app.require_subcommand(1);

  auto* simulate = app.add_subcommand("simulate", "run one experiment from a config file");
  std::string config_path;
  std::string algorithm;
  std::optional<int> agents;
  std::optional<int> dim;
  std::optional<Iteration> iters;
  std::optional<std::uint64_t> seed;
  std::string output;
  simulate->add_option("--config", config_path, "YAML or JSON experiment file")->required();
  simulate->add_option("--algorithm", algorithm, "run only this algorithm");
  simulate->add_option("--agents", agents, "override topology.agents");
  simulate->add_option("--dim", dim, "override signal.dim");
  simulate->add_option("--iters", iters, "override iterations");
  simulate->add_option("--seed", seed, "override seed");
  simulate->add_option("--output", output, "output directory");

  auto* preset = app.add_subcommand("preset", "run a named experiment preset");
  std::string preset_name;
  std::string preset_output;
  std::string preset_dir = DYNTRACK_PRESET_DIR;
  std::optional<Iteration> preset_iters;
  preset->add_option("name", preset_name, "fig3, fig4, fig6 or fig7")->required();
  preset->add_option("--output", preset_output, "output directory")->required();
  preset->add_option("--iters", preset_iters, "truncate every experiment to this many iterations");
  preset->add_option("--preset-dir", preset_dir, "directory holding the preset files");

  auto* topology = app.add_subcommand("topology", "generate or inspect network topologies");
  topology->require_subcommand(1);
  auto* gen = topology->add_subcommand("gen", "print a topology document");
  TopologyFlags gen_flags;
  std::string gen_output;
  add_topology_flags(gen, gen_flags);
  gen->add_option("--output", gen_output, "write to this file instead of stdout");
  auto* inspect = topology->add_subcommand("inspect", "report connectivity and lambda");
  TopologyFlags inspect_flags;
  std::string inspect_path;
  inspect->add_option("file", inspect_path, "topology document; generator flags are used when absent");
  add_topology_flags(inspect, inspect_flags);

  CLI11_PARSE(app, argc, argv);

  try {
    if (simulate->parsed()) {
      ExperimentConfig cfg = load_config(config_path);
      if (!algorithm.empty()) cfg.algorithms = {parse_algorithm(algorithm)};
      if (agents) cfg.topology.agents = *agents;
      if (dim) cfg.signal.dimension = *dim;
      if (iters) cfg.iterations = *iters;
      if (seed) cfg.seed = *seed;
      if (!output.empty()) cfg.output = output;
      const ExperimentResult result = run_experiment(cfg);
      fmt::print("wrote {} (lambda {:.6g})\n", result.summary.string(), result.lambda);
    } else if (preset->parsed()) {
      PresetOptions opts;
      opts.preset_dir = preset_dir;
      opts.iterations = preset_iters;
      const PresetResult result = run_preset(preset_name, preset_output, opts);
      fmt::print("wrote {}\n", result.manifest.string());
    } else if (gen->parsed()) {
      const Topology t = make_topology(gen_flags);
      if (gen_output.empty()) fmt::print("{}", topology_to_yaml(t));
      else save_topology(gen_output, t);
    } else if (inspect->parsed()) {
      print_inspection(inspect_path.empty() ? make_topology(inspect_flags) : load_topology(inspect_path));
    }
  } catch (const InvariantError& e) {
    fmt::print(stderr, "invariant violated: {}\n", e.what());
    return 3;
  } catch (const std::invalid_argument& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return 1;
  }
  return 0;
}
