#include "dyntrack/config.hpp"

#include "config_node.hpp"

#include <fstream>
#include <set>
#include <sstream>

namespace dyntrack {
namespace detail {

void config_fail(const YAML::Node& node, const std::string& message) {
  const auto mark = node.Mark();
  if (mark.line >= 0) throw ConfigError("config line " + std::to_string(mark.line + 1) + ": " + message);
  throw ConfigError("config: " + message);
}

namespace {

void check_keys(const YAML::Node& node, const char* section, const std::set<std::string>& allowed) {
  if (!node.IsMap()) config_fail(node, std::string("'") + section + "' must be a mapping");
  for (const auto& item : node) {
    const auto key = item.first.as<std::string>();
    if (!allowed.count(key)) config_fail(item.first, std::string("unknown key '") + key + "' in " + section);
  }
}

template <typename T>
T get(const YAML::Node& node, const std::string& key) {
  try {
    return node.as<T>();
  } catch (const YAML::Exception&) {
    config_fail(node, "bad value for '" + key + "'");
  }
}

template <typename T>
void read(const YAML::Node& parent, const std::string& key, T& out) {
  if (const YAML::Node node = parent[key]) out = get<T>(node, key);
}

template <typename T>
void read(const YAML::Node& parent, const std::string& key, std::optional<T>& out) {
  if (const YAML::Node node = parent[key]) {
    if (node.IsNull()) out.reset();
    else out = get<T>(node, key);
  }
}

std::filesystem::path resolve(const std::filesystem::path& base, const std::filesystem::path& p) {
  return p.is_relative() && !base.empty() ? base / p : p;
}

TopologySpec parse_topology(const YAML::Node& node, const std::filesystem::path& base_dir) {
  check_keys(node, "topology", {"kind", "agents", "radius", "seed", "edges", "path"});
  TopologySpec t;
  read(node, "kind", t.kind);
  read(node, "agents", t.agents);
  read(node, "radius", t.radius);
  read(node, "seed", t.seed);
  if (const YAML::Node edges = node["edges"]) {
    for (const YAML::Node& pair : edges) {
      if (!pair.IsSequence() || pair.size() != 2) config_fail(pair, "edges must be [a, b] pairs");
      t.edges.push_back({get<int>(pair[0], "edges"), get<int>(pair[1], "edges")});
    }
  }
  if (const YAML::Node p = node["path"]) t.path = resolve(base_dir, get<std::string>(p, "path"));
  static const std::set<std::string> kinds{"geometric", "cycle", "complete", "edges", "file"};
  if (!kinds.count(t.kind)) config_fail(node["kind"], "unknown topology kind '" + t.kind + "'");
  return t;
}

SignalSpec parse_signal(const YAML::Node& node, const std::filesystem::path& base_dir) {
  check_keys(node, "signal",
             {"kind", "dim", "seed", "alpha", "beta", "gamma", "flip_iteration", "slope", "spread",
              "hold_iteration", "values", "path"});
  SignalSpec s;
  read(node, "kind", s.kind);
  read(node, "dim", s.dimension);
  read(node, "seed", s.seed);
  read(node, "alpha", s.alpha);
  read(node, "beta", s.beta);
  read(node, "gamma", s.gamma);
  read(node, "flip_iteration", s.flip_iteration);
  read(node, "slope", s.slope);
  read(node, "spread", s.spread);
  read(node, "hold_iteration", s.hold_iteration);
  if (const YAML::Node v = node["values"]) {
    if (!v.IsSequence() || v.size() == 0) config_fail(v, "values must be a list of rows");
    const auto rows = static_cast<Eigen::Index>(v.size());
    const auto cols = static_cast<Eigen::Index>(v[0].size());
    Eigen::MatrixXd m(rows, cols);
    for (Eigen::Index k = 0; k < rows; ++k) {
      const YAML::Node row = v[static_cast<std::size_t>(k)];
      if (!row.IsSequence() || static_cast<Eigen::Index>(row.size()) != cols)
        config_fail(row, "values rows must all have " + std::to_string(cols) + " entries");
      for (Eigen::Index n = 0; n < cols; ++n) m(k, n) = get<double>(row[static_cast<std::size_t>(n)], "values");
    }
    s.values = std::move(m);
    if (!node["dim"]) s.dimension = static_cast<int>(cols);
  }
  if (const YAML::Node p = node["path"]) s.path = resolve(base_dir, get<std::string>(p, "path"));
  static const std::set<std::string> kinds{"static", "decaying_sinusoid_ramp", "piecewise_ramp", "zero_average",
                                           "trace"};
  if (!kinds.count(s.kind)) config_fail(node["kind"], "unknown signal kind '" + s.kind + "'");
  return s;
}

}  // namespace

ExperimentConfig config_from_node(const YAML::Node& root, const std::filesystem::path& base_dir) {
  if (!root || root.IsNull()) throw ConfigError("config: empty document");
  check_keys(root, "config",
             {"version", "name", "topology", "signal", "algorithm", "algorithms", "iterations", "ensemble_size",
              "seed", "record_every", "record_entry", "stop_epsilon", "dobrushin_trials", "output"});
  if (const YAML::Node v = root["version"]; v && get<int>(v, "version") != 1)
    config_fail(v, "unsupported config version");
  ExperimentConfig cfg;
  if (const YAML::Node t = root["topology"]) cfg.topology = parse_topology(t, base_dir);
  if (const YAML::Node s = root["signal"]) cfg.signal = parse_signal(s, base_dir);
  if (root["algorithm"] && root["algorithms"]) config_fail(root["algorithms"], "give either algorithm or algorithms");
  auto parse_alg = [](const YAML::Node& n) {
    try {
      return parse_algorithm(get<std::string>(n, "algorithm"));
    } catch (const std::invalid_argument& e) {
      if (dynamic_cast<const ConfigError*>(&e)) throw;
      config_fail(n, e.what());
    }
  };
  if (const YAML::Node a = root["algorithm"]) cfg.algorithms = {parse_alg(a)};
  if (const YAML::Node list = root["algorithms"]) {
    if (!list.IsSequence() || list.size() == 0) config_fail(list, "algorithms must be a non-empty list");
    cfg.algorithms.clear();
    for (const YAML::Node& a : list) cfg.algorithms.push_back(parse_alg(a));
  }
  read(root, "iterations", cfg.iterations);
  read(root, "ensemble_size", cfg.ensemble_size);
  read(root, "seed", cfg.seed);
  read(root, "record_every", cfg.record_every);
  read(root, "record_entry", cfg.record_entry);
  read(root, "stop_epsilon", cfg.stop_epsilon);
  read(root, "dobrushin_trials", cfg.dobrushin_trials);
  if (const YAML::Node o = root["output"]) cfg.output = resolve(base_dir, get<std::string>(o, "output"));

  // Cross-field checks that can point at a line.
  if (cfg.iterations < 1) config_fail(root["iterations"], "iterations must be >= 1");
  if (cfg.ensemble_size < 1) config_fail(root["ensemble_size"], "ensemble_size must be >= 1");
  if (cfg.record_every < 1) config_fail(root["record_every"], "record_every must be >= 1");
  validate(cfg);
  return cfg;
}

YAML::Node merge_nodes(const YAML::Node& base, const YAML::Node& overlay) {
  if (!overlay || overlay.IsNull()) return base ? YAML::Clone(base) : YAML::Node();
  if (!base || !base.IsMap() || !overlay.IsMap()) return YAML::Clone(overlay);
  YAML::Node out = YAML::Clone(base);
  for (const auto& item : overlay) {
    const auto key = item.first.as<std::string>();
    out[key] = merge_nodes(base[key], item.second);
  }
  return out;
}

}  // namespace detail

ExperimentConfig parse_config(const std::string& text, const std::filesystem::path& base_dir) {
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::ParserException& e) {
    throw ConfigError("config line " + std::to_string(e.mark.line + 1) + ": " + e.msg);
  }
  return detail::config_from_node(root, base_dir);
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_config(buffer.str(), path.parent_path());
}

void validate(const ExperimentConfig& cfg) {
  if (cfg.iterations < 1) throw ConfigError("config: iterations must be >= 1");
  if (cfg.ensemble_size < 1) throw ConfigError("config: ensemble_size must be >= 1");
  if (cfg.record_every < 1) throw ConfigError("config: record_every must be >= 1");
  if (cfg.algorithms.empty()) throw ConfigError("config: no algorithm given");
  if (cfg.topology.kind != "file" && cfg.topology.agents < 1) throw ConfigError("config: topology.agents must be >= 1");
  if (cfg.topology.kind == "cycle" && cfg.topology.agents < 3) throw ConfigError("config: a cycle needs agents >= 3");
  if (cfg.topology.kind == "geometric" && !(cfg.topology.radius > 0.0))
    throw ConfigError("config: topology.radius must be positive");
  if (cfg.signal.kind != "trace" && cfg.signal.dimension < 1) throw ConfigError("config: signal.dim must be >= 1");
  if (cfg.record_entry < -1 || (cfg.signal.kind != "trace" && cfg.record_entry >= cfg.signal.dimension))
    throw ConfigError("config: record_entry must be -1 or a coordinate index");
  if (cfg.stop_epsilon && !(*cfg.stop_epsilon >= 0.0)) throw ConfigError("config: stop_epsilon must be >= 0");
  if (cfg.dobrushin_trials < 0) throw ConfigError("config: dobrushin_trials must be >= 0");
  for (const auto& a : cfg.algorithms)
    if (a.id == AlgorithmId::ExactDiffusion && !(a.mu > 0.0 && a.mu <= 1.0))
      throw ConfigError("config: exact_diffusion mu must lie in (0, 1]");
}

Topology build_topology(const TopologySpec& spec) {
  if (spec.kind == "geometric") return build_connected_random_geometric(spec.agents, spec.radius, spec.seed);
  if (spec.kind == "cycle") return build_cycle(spec.agents);
  if (spec.kind == "complete") return build_complete(spec.agents);
  if (spec.kind == "edges") return Topology(spec.agents, spec.edges);
  if (spec.kind == "file") return load_topology(spec.path);
  throw ConfigError("config: unknown topology kind '" + spec.kind + "'");
}

SignalModel build_signal(const SignalSpec& spec, int num_agents, std::uint64_t default_seed) {
  const std::uint64_t seed = spec.seed.value_or(default_seed);
  if (spec.kind == "trace") {
    SignalModel m = SignalModel::from_trace_csv(spec.path);
    if (m.num_agents() != num_agents)
      throw ConfigError("config: trace has " + std::to_string(m.num_agents()) + " agents, topology has " +
                        std::to_string(num_agents));
    return m;
  }
  SignalVariant variant;
  if (spec.kind == "static") {
    variant = StaticSignal{spec.values};
  } else if (spec.kind == "decaying_sinusoid_ramp") {
    variant = DecayingSinusoidRamp{spec.alpha, spec.beta, spec.gamma, spec.flip_iteration};
  } else if (spec.kind == "piecewise_ramp") {
    variant = PiecewiseRamp{spec.slope, spec.spread, spec.hold_iteration};
  } else if (spec.kind == "zero_average") {
    variant = ZeroAverage{spec.alpha, spec.beta};
  } else {
    throw ConfigError("config: unknown signal kind '" + spec.kind + "'");
  }
  return SignalModel(num_agents, spec.dimension, seed, std::move(variant));
}

}  // namespace dyntrack
