#include "dyntrack/algorithms.hpp"

#include <yaml-cpp/yaml.h>

#include <stdexcept>

namespace dyntrack {
namespace {

void emit_matrix(YAML::Emitter& out, const char* key, const Eigen::MatrixXd& m) {
  out << YAML::Key << key << YAML::Value << YAML::BeginSeq;
  for (Eigen::Index k = 0; k < m.rows(); ++k) {
    out << YAML::Flow << YAML::BeginSeq;
    for (Eigen::Index n = 0; n < m.cols(); ++n) out << m(k, n);
    out << YAML::EndSeq;
  }
  out << YAML::EndSeq;
}

Eigen::MatrixXd read_matrix(const YAML::Node& root, const char* key, Eigen::Index rows, Eigen::Index cols) {
  const YAML::Node node = root[key];
  if (!node || !node.IsSequence() || static_cast<Eigen::Index>(node.size()) != rows)
    throw std::invalid_argument(std::string("checkpoint field '") + key + "' must list " + std::to_string(rows) +
                                " rows");
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index k = 0; k < rows; ++k) {
    const YAML::Node row = node[static_cast<std::size_t>(k)];
    if (!row.IsSequence() || static_cast<Eigen::Index>(row.size()) != cols)
      throw std::invalid_argument(std::string("checkpoint field '") + key + "' line " +
                                  std::to_string(row.Mark().line + 1) + ": expected " + std::to_string(cols) +
                                  " values");
    for (Eigen::Index n = 0; n < cols; ++n) m(k, n) = row[static_cast<std::size_t>(n)].as<double>();
  }
  return m;
}

}  // namespace

Checkpoint make_checkpoint(const NetworkRun& run) { return {run.algorithm, run.seed, run.iteration, run.state}; }

NetworkRun resume_run(CombinationMatrix combination, std::shared_ptr<const SignalModel> model,
                      const Checkpoint& checkpoint) {
  NetworkRun run = start_run(std::move(combination), std::move(model), checkpoint.algorithm, checkpoint.seed);
  const auto& s = checkpoint.state;
  const auto K = static_cast<Eigen::Index>(run.num_agents());
  const auto N = static_cast<Eigen::Index>(run.dimension());
  for (const Eigen::MatrixXd* m : {&s.w, &s.w_prev, &s.r_last, &s.v, &s.p, &s.psi, &s.y})
    if (m->rows() != K || m->cols() != N) throw std::invalid_argument("checkpoint state is not K x N");
  if (static_cast<Eigen::Index>(s.frozen.size()) != K) throw std::invalid_argument("checkpoint frozen flags != K");
  run.iteration = checkpoint.iteration;
  run.state = s;
  return run;
}

std::string checkpoint_to_yaml(const Checkpoint& checkpoint) {
  YAML::Emitter out;
  out.SetDoublePrecision(17);
  out << YAML::BeginMap;
  out << YAML::Key << "format" << YAML::Value << 1;
  out << YAML::Key << "algorithm" << YAML::Value << to_string(checkpoint.algorithm);
  out << YAML::Key << "seed" << YAML::Value << checkpoint.seed;
  out << YAML::Key << "iteration" << YAML::Value << checkpoint.iteration;
  out << YAML::Key << "num_agents" << YAML::Value << checkpoint.state.w.rows();
  out << YAML::Key << "dimension" << YAML::Value << checkpoint.state.w.cols();
  out << YAML::Key << "frozen" << YAML::Value << YAML::Flow << YAML::BeginSeq;
  for (char f : checkpoint.state.frozen) out << static_cast<int>(f);
  out << YAML::EndSeq;
  emit_matrix(out, "w", checkpoint.state.w);
  emit_matrix(out, "w_prev", checkpoint.state.w_prev);
  emit_matrix(out, "r_last", checkpoint.state.r_last);
  emit_matrix(out, "v", checkpoint.state.v);
  emit_matrix(out, "p", checkpoint.state.p);
  emit_matrix(out, "psi", checkpoint.state.psi);
  emit_matrix(out, "y", checkpoint.state.y);
  out << YAML::EndMap;
  return std::string(out.c_str()) + "\n";
}

Checkpoint checkpoint_from_yaml(const std::string& text) {
  const YAML::Node root = YAML::Load(text);
  for (const char* key : {"format", "algorithm", "seed", "iteration", "num_agents", "dimension", "frozen"})
    if (!root[key]) throw std::invalid_argument(std::string("checkpoint lacks '") + key + "'");
  if (root["format"].as<int>() != 1) throw std::invalid_argument("unsupported checkpoint format");
  Checkpoint c;
  c.algorithm = parse_algorithm(root["algorithm"].as<std::string>());
  c.seed = root["seed"].as<std::uint64_t>();
  c.iteration = root["iteration"].as<Iteration>();
  const auto K = root["num_agents"].as<Eigen::Index>();
  const auto N = root["dimension"].as<Eigen::Index>();
  c.state.w = read_matrix(root, "w", K, N);
  c.state.w_prev = read_matrix(root, "w_prev", K, N);
  c.state.r_last = read_matrix(root, "r_last", K, N);
  c.state.v = read_matrix(root, "v", K, N);
  c.state.p = read_matrix(root, "p", K, N);
  c.state.psi = read_matrix(root, "psi", K, N);
  c.state.y = read_matrix(root, "y", K, N);
  for (const YAML::Node& f : root["frozen"]) c.state.frozen.push_back(static_cast<char>(f.as<int>() != 0));
  if (static_cast<Eigen::Index>(c.state.frozen.size()) != K)
    throw std::invalid_argument("checkpoint 'frozen' must list " + std::to_string(K) + " flags");
  return c;
}

}  // namespace dyntrack
