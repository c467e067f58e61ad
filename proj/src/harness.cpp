#include "dyntrack/harness.hpp"

#include "config_node.hpp"
#include "dyntrack/rng.hpp"

#include <fmt/format.h>
#include <fmt/os.h>
#include <yaml-cpp/yaml.h>

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <exception>
#include <fstream>
#include <thread>

namespace dyntrack {
namespace {

struct Sample {
  double msd = 0.0;
  double max_err = 0.0;
};

struct MemberTrace {
  std::vector<Sample> samples;  // one per recorded iteration
  int frozen = 0;
};

std::vector<Iteration> recorded_iterations(const ExperimentConfig& cfg) {
  std::vector<Iteration> out;
  for (Iteration i = 1; i <= cfg.iterations; ++i)
    if (i % cfg.record_every == 0 || i == cfg.iterations) out.push_back(i);
  return out;
}

Sample measure(const Eigen::MatrixXd& estimate, const Eigen::VectorXd& truth, int entry) {
  if (entry < 0) {
    const MetricsRecord rec = record(estimate, truth, 0, 0);
    return {rec.aggregate_msd / static_cast<double>(truth.size()), rec.max_norm_err};
  }
  const auto diff = estimate.col(entry).array() - truth(entry);
  return {diff.square().mean(), diff.abs().maxCoeff()};
}

MemberTrace run_member(const ExperimentConfig& cfg, const CombinationMatrix& a,
                       const std::shared_ptr<const SignalModel>& model, const AlgorithmSpec& spec, int member,
                       const std::vector<Iteration>& recorded, const std::vector<Eigen::VectorXd>& truths) {
  NetworkRun run = start_run(a, model, spec, stream_key(cfg.seed, member));
  MemberTrace trace;
  trace.samples.reserve(recorded.size());
  std::size_t next = 0;
  for (Iteration i = 1; i <= cfg.iterations; ++i) {
    step(run);
    if (cfg.stop_epsilon) freeze_agents(run, check_stop(run, *cfg.stop_epsilon));
    if (next < recorded.size() && recorded[next] == i) {
      trace.samples.push_back(measure(output(run), truths[next], cfg.record_entry));
      ++next;
    }
  }
  trace.frozen = static_cast<int>(std::count(run.state.frozen.begin(), run.state.frozen.end(), 1));
  return trace;
}

// Runs tasks 0..count-1 on up to `workers` threads. Rethrows the exception of
// the lowest failing task so failures do not depend on scheduling.
template <typename Task>
void parallel_for(int count, int workers, Task&& task) {
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(count));
  std::atomic<int> next{0};
  auto worker = [&] {
    for (int j = next++; j < count; j = next++) {
      try {
        task(j);
      } catch (...) {
        errors[static_cast<std::size_t>(j)] = std::current_exception();
      }
    }
  };
  const int n = std::clamp(workers, 1, std::max(count, 1));
  if (n == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (int t = 0; t < n; ++t) pool.emplace_back(worker);
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

std::string g17(double x) { return fmt::format("{:.17g}", x); }

void write_csv(const std::filesystem::path& path, const ExperimentConfig& cfg, const std::vector<Iteration>& recorded,
               const std::vector<MemberTrace>& members, const AlgorithmSummary& summary) {
  auto out = fmt::output_file(path.string());
  out.print("iter,member,entry,msd,max_err,scalars_sent\n");
  for (std::size_t r = 0; r < recorded.size(); ++r) {
    const std::int64_t sent = recorded[r] * summary.scalars_per_iteration;
    for (std::size_t m = 0; m < members.size(); ++m) {
      const Sample& s = members[m].samples[r];
      out.print("{},{},{},{},{},{}\n", recorded[r], m, cfg.record_entry, g17(s.msd), g17(s.max_err), sent);
    }
    if (members.size() > 1)
      out.print("{},-1,{},{},{},{}\n", recorded[r], cfg.record_entry, g17(summary.mean_msd[r]),
                g17(summary.mean_max_err[r]), sent);
  }
}

void emit_summary(const std::filesystem::path& path, const ExperimentConfig& cfg, const ExperimentResult& result) {
  YAML::Emitter out;
  out.SetDoublePrecision(17);
  out << YAML::BeginMap;
  out << YAML::Key << "version" << YAML::Value << 1;
  out << YAML::Key << "num_agents" << YAML::Value << result.num_agents;
  out << YAML::Key << "dimension" << YAML::Value << result.dimension;
  out << YAML::Key << "lambda" << YAML::Value << result.lambda;
  out << YAML::Key << "iterations" << YAML::Value << cfg.iterations;
  out << YAML::Key << "ensemble_size" << YAML::Value << cfg.ensemble_size;
  out << YAML::Key << "seed" << YAML::Value << cfg.seed;
  out << YAML::Key << "record_every" << YAML::Value << cfg.record_every;
  out << YAML::Key << "record_entry" << YAML::Value << cfg.record_entry;
  out << YAML::Key << "algorithms" << YAML::Value << YAML::BeginSeq;
  for (const auto& a : result.algorithms) {
    out << YAML::BeginMap;
    out << YAML::Key << "id" << YAML::Value << to_string(a.algorithm);
    out << YAML::Key << "csv" << YAML::Value << a.csv.filename().string();
    out << YAML::Key << "scalars_per_iteration" << YAML::Value << a.scalars_per_iteration;
    out << YAML::Key << "total_scalars_sent" << YAML::Value << a.total_scalars_sent;
    out << YAML::Key << "final_msd" << YAML::Value << a.mean_msd.back();
    out << YAML::Key << "final_max_err" << YAML::Value << a.mean_max_err.back();
    out << YAML::Key << "fitted_rate" << YAML::Value;
    if (a.rate) {
      out << YAML::BeginMap << YAML::Key << "rate" << YAML::Value << a.rate->rate << YAML::Key << "r_squared"
          << YAML::Value << a.rate->r_squared << YAML::Key << "samples" << YAML::Value << a.rate->samples
          << YAML::EndMap;
    } else {
      out << YAML::Null;
    }
    if (a.dobrushin) {
      out << YAML::Key << "dobrushin" << YAML::Value << YAML::BeginMap << YAML::Key << "window" << YAML::Value
          << a.dobrushin->window << YAML::Key << "xi" << YAML::Value << a.dobrushin->xi << YAML::Key << "rate"
          << YAML::Value << a.dobrushin->rate << YAML::EndMap;
    }
    if (cfg.stop_epsilon) {
      out << YAML::Key << "frozen_agents" << YAML::Value << YAML::Flow << a.frozen_agents;
    }
    out << YAML::EndMap;
  }
  out << YAML::EndSeq << YAML::EndMap;
  std::ofstream file(path);
  if (!file) throw std::runtime_error("cannot write " + path.string());
  file << out.c_str() << "\n";
}

}  // namespace

int default_worker_count() {
  int hw = static_cast<int>(std::thread::hardware_concurrency());
  if (hw < 1) hw = 1;
  if (const char* env = std::getenv("COORD_SIM_THREADS")) {
    char* end = nullptr;
    const long cap = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && cap >= 1) return static_cast<int>(cap);
  }
  return hw;
}

ExperimentResult run_experiment(const ExperimentConfig& cfg, const RunOptions& options) {
  validate(cfg);
  const Topology topology = build_topology(cfg.topology);
  const CombinationMatrix a = metropolis_weights(topology);
  const auto model =
      std::make_shared<const SignalModel>(build_signal(cfg.signal, topology.num_agents(), cfg.seed));
  if (cfg.record_entry >= model->dimension()) throw ConfigError("config: record_entry exceeds the dimension");

  ExperimentResult result;
  result.num_agents = topology.num_agents();
  result.dimension = model->dimension();
  result.lambda = topology.num_agents() == 1 ? 0.0 : second_eigenvalue_magnitude(a);

  const auto recorded = recorded_iterations(cfg);
  std::vector<Eigen::VectorXd> truths;
  truths.reserve(recorded.size());
  for (Iteration i : recorded) truths.push_back(model->true_average(i));

  const int members = cfg.ensemble_size;
  const int algs = static_cast<int>(cfg.algorithms.size());
  std::vector<MemberTrace> traces(static_cast<std::size_t>(algs * members));
  parallel_for(algs * members, options.threads.value_or(default_worker_count()), [&](int task) {
    const int alg = task / members;
    traces[static_cast<std::size_t>(task)] =
        run_member(cfg, a, model, cfg.algorithms[static_cast<std::size_t>(alg)], task % members, recorded, truths);
  });

  if (options.write_files) std::filesystem::create_directories(cfg.output);
  for (int alg = 0; alg < algs; ++alg) {
    AlgorithmSummary s;
    s.algorithm = cfg.algorithms[static_cast<std::size_t>(alg)];
    s.csv = cfg.output / (label(s.algorithm) + ".csv");
    s.scalars_per_iteration = scalars_per_iteration(s.algorithm, result.dimension);
    s.total_scalars_sent = cfg.iterations * s.scalars_per_iteration;
    s.iterations = recorded;
    const auto first = traces.begin() + static_cast<std::ptrdiff_t>(alg) * members;
    const std::vector<MemberTrace> mine(first, first + members);
    for (std::size_t r = 0; r < recorded.size(); ++r) {
      double msd = 0.0;
      double err = 0.0;
      for (const auto& m : mine) {
        msd += m.samples[r].msd;
        err += m.samples[r].max_err;
      }
      s.mean_msd.push_back(msd / members);
      s.mean_max_err.push_back(err / members);
    }
    for (const auto& m : mine) s.frozen_agents.push_back(m.frozen);
    std::vector<std::pair<Iteration, double>> series;
    for (std::size_t r = 0; r < recorded.size(); ++r) series.emplace_back(recorded[r], s.mean_msd[r]);
    try {
      s.rate = fit_geometric_rate(series);
    } catch (const std::invalid_argument&) {
      s.rate.reset();  // too short or hits zero; reported as null
    }
    if (cfg.dobrushin_trials > 0 && is_coordinate_algorithm(s.algorithm.id) && result.num_agents > 1) {
      const int window = result.dimension * std::max(1, primitivity_exponent(a.weights()));
      const auto mode = s.algorithm.id == AlgorithmId::SyncCoord ? SelectionMode::Shared : SelectionMode::Independent;
      s.dobrushin = dobrushin_estimate(a, result.dimension, window, cfg.dobrushin_trials, cfg.seed, mode);
    }
    if (options.write_files) write_csv(s.csv, cfg, recorded, mine, s);
    result.algorithms.push_back(std::move(s));
  }
  result.summary = cfg.output / "summary.yaml";
  if (options.write_files) emit_summary(result.summary, cfg, result);
  return result;
}

std::vector<std::string> preset_names() { return {"fig3", "fig4", "fig6", "fig7"}; }

std::vector<std::pair<std::string, ExperimentConfig>> load_preset(const std::string& name,
                                                                  const std::filesystem::path& preset_dir) {
  const auto names = preset_names();
  if (std::find(names.begin(), names.end(), name) == names.end())
    throw ConfigError("unknown preset '" + name + "' (expected fig3, fig4, fig6 or fig7)");
  const auto path = preset_dir / (name + ".yaml");
  YAML::Node root;
  try {
    root = YAML::LoadFile(path.string());
  } catch (const YAML::BadFile&) {
    throw ConfigError("cannot read preset " + path.string());
  } catch (const YAML::ParserException& e) {
    throw ConfigError(path.string() + " line " + std::to_string(e.mark.line + 1) + ": " + e.msg);
  }
  if (!root["experiments"] || !root["experiments"].IsSequence())
    throw ConfigError(path.string() + ": preset lacks an experiments list");
  std::vector<std::pair<std::string, ExperimentConfig>> out;
  for (const YAML::Node& exp : root["experiments"]) {
    if (!exp["name"]) detail::config_fail(exp, "preset experiment lacks a name");
    const YAML::Node merged = detail::merge_nodes(root["common"], exp);
    out.emplace_back(exp["name"].as<std::string>(), detail::config_from_node(merged, preset_dir));
  }
  return out;
}

PresetResult run_preset(const std::string& name, const std::filesystem::path& output, const PresetOptions& options) {
  PresetResult result;
  result.name = name;
  for (auto& [exp_name, cfg] : load_preset(name, options.preset_dir)) {
    if (options.iterations) cfg.iterations = *options.iterations;
    cfg.output = output / exp_name;
    result.experiment_names.push_back(exp_name);
    result.experiments.push_back(run_experiment(cfg, options.run));
  }
  if (!options.run.write_files) return result;

  YAML::Emitter out;
  out.SetDoublePrecision(17);
  out << YAML::BeginMap;
  out << YAML::Key << "preset" << YAML::Value << name;
  out << YAML::Key << "experiments" << YAML::Value << YAML::BeginSeq;
  for (std::size_t j = 0; j < result.experiments.size(); ++j) {
    const auto& exp = result.experiments[j];
    out << YAML::BeginMap;
    out << YAML::Key << "name" << YAML::Value << result.experiment_names[j];
    out << YAML::Key << "num_agents" << YAML::Value << exp.num_agents;
    out << YAML::Key << "lambda" << YAML::Value << exp.lambda;
    out << YAML::Key << "summary" << YAML::Value << (result.experiment_names[j] + "/summary.yaml");
    out << YAML::Key << "curves" << YAML::Value << YAML::BeginSeq;
    for (const auto& a : exp.algorithms) out << (result.experiment_names[j] + "/" + a.csv.filename().string());
    out << YAML::EndSeq << YAML::EndMap;
  }
  out << YAML::EndSeq << YAML::EndMap;
  result.manifest = output / "manifest.yaml";
  std::ofstream file(result.manifest);
  if (!file) throw std::runtime_error("cannot write " + result.manifest.string());
  file << out.c_str() << "\n";
  return result;
}

}  // namespace dyntrack
