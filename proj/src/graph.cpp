#include "dyntrack/graph.hpp"

#include "dyntrack/errors.hpp"

#include <yaml-cpp/yaml.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>
#include <sstream>
#include <stdexcept>

namespace dyntrack {

Topology::Topology(int num_agents, std::vector<Edge> edges) : num_agents_(num_agents) {
  if (num_agents < 1) throw std::invalid_argument("topology needs at least one agent");
  for (Edge& e : edges) {
    if (e.first < 0 || e.second < 0 || e.first >= num_agents || e.second >= num_agents)
      throw std::invalid_argument("edge (" + std::to_string(e.first) + "," + std::to_string(e.second) +
                                  ") references an agent outside [0, " + std::to_string(num_agents) + ")");
    if (e.first == e.second)
      throw std::invalid_argument("self-pair (" + std::to_string(e.first) + "," + std::to_string(e.first) +
                                  ") is not an edge");
    if (e.first > e.second) std::swap(e.first, e.second);
  }
  std::sort(edges.begin(), edges.end());
  if (auto dup = std::adjacent_find(edges.begin(), edges.end()); dup != edges.end())
    throw std::invalid_argument("duplicate edge (" + std::to_string(dup->first) + "," +
                                std::to_string(dup->second) + ")");
  edges_ = std::move(edges);
}

std::vector<int> Topology::degrees() const {
  std::vector<int> deg(static_cast<std::size_t>(num_agents_), 0);
  for (const Edge& e : edges_) {
    ++deg[static_cast<std::size_t>(e.first)];
    ++deg[static_cast<std::size_t>(e.second)];
  }
  return deg;
}

std::vector<std::vector<int>> Topology::neighbors() const {
  std::vector<std::vector<int>> adj(static_cast<std::size_t>(num_agents_));
  for (const Edge& e : edges_) {
    adj[static_cast<std::size_t>(e.first)].push_back(e.second);
    adj[static_cast<std::size_t>(e.second)].push_back(e.first);
  }
  return adj;
}

bool Topology::is_connected() const {
  const auto levels = detail::bfs_levels(neighbors());
  return std::none_of(levels.begin(), levels.end(), [](int l) { return l < 0; });
}

Topology build_random_geometric(int num_agents, double radius, std::uint64_t seed) {
  if (num_agents < 1) throw std::invalid_argument("random geometric graph needs K >= 1");
  // Radii above the unit-square diameter are allowed and join every pair.
  if (!(radius > 0.0)) throw std::invalid_argument("radius must be positive");
  std::mt19937_64 gen(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<Eigen::Vector2d> points(static_cast<std::size_t>(num_agents));
  for (auto& p : points) {
    p.x() = unit(gen);
    p.y() = unit(gen);
  }
  std::vector<Edge> edges;
  for (int l = 0; l < num_agents; ++l)
    for (int k = l + 1; k < num_agents; ++k)
      if ((points[static_cast<std::size_t>(l)] - points[static_cast<std::size_t>(k)]).norm() < radius)
        edges.push_back({l, k});
  return Topology(num_agents, std::move(edges));
}

Topology build_connected_random_geometric(int num_agents, double radius, std::uint64_t seed,
                                          int max_attempts) {
  for (int attempt = 0; attempt < max_attempts; ++attempt) {
    Topology t = build_random_geometric(num_agents, radius, seed + static_cast<std::uint64_t>(attempt));
    if (t.is_connected()) return t;
  }
  throw std::runtime_error("no connected random geometric graph with K=" + std::to_string(num_agents) +
                           ", radius=" + std::to_string(radius) + " after " + std::to_string(max_attempts) +
                           " attempts");
}

Topology build_cycle(int num_agents) {
  if (num_agents < 3) throw std::invalid_argument("cycle needs K >= 3");
  std::vector<Edge> edges;
  for (int k = 0; k < num_agents; ++k) edges.push_back({k, (k + 1) % num_agents});
  return Topology(num_agents, std::move(edges));
}

Topology build_complete(int num_agents) {
  std::vector<Edge> edges;
  for (int l = 0; l < num_agents; ++l)
    for (int k = l + 1; k < num_agents; ++k) edges.push_back({l, k});
  return Topology(num_agents, std::move(edges));
}

CombinationMatrix::CombinationMatrix(Eigen::MatrixXd weights) : weights_(std::move(weights)) {
  const auto& a = weights_;
  if (a.rows() == 0 || a.rows() != a.cols()) throw std::invalid_argument("combination matrix must be square");
  if ((a.array() < 0.0).any()) throw std::invalid_argument("combination matrix has a negative entry");
  if (a != a.transpose()) throw std::invalid_argument("combination matrix is not symmetric");
  const double row_dev = (a.rowwise().sum().array() - 1.0).abs().maxCoeff();
  const double col_dev = (a.colwise().sum().array() - 1.0).abs().maxCoeff();
  if (row_dev > kStochasticTolerance || col_dev > kStochasticTolerance)
    throw std::invalid_argument("combination matrix is not doubly stochastic (deviation " +
                                std::to_string(std::max(row_dev, col_dev)) + ")");
  if (!(a.diagonal().array() > 0.0).any())
    throw std::invalid_argument("combination matrix needs at least one positive diagonal entry");
}

CombinationMatrix metropolis_weights(const Topology& topology) {
  if (!topology.is_connected()) throw std::invalid_argument("metropolis weights need a connected topology");
  const int n = topology.num_agents();
  const auto deg = topology.degrees();
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n, n);
  for (const Edge& e : topology.edges()) {
    const double w =
        1.0 / (1.0 + std::max(deg[static_cast<std::size_t>(e.first)], deg[static_cast<std::size_t>(e.second)]));
    a(e.first, e.second) = w;
    a(e.second, e.first) = w;
  }
  for (int k = 0; k < n; ++k) {
    // Same summation order for a row and its transposed column keeps the
    // diagonal identical whichever way it is read.
    double off = 0.0;
    for (int l = 0; l < n; ++l)
      if (l != k) off += a(l, k);
    a(k, k) = 1.0 - off;
  }
  return CombinationMatrix(std::move(a));
}

double second_eigenvalue_magnitude(const CombinationMatrix& a) {
  const Eigen::Index n = a.num_agents();
  const Eigen::MatrixXd centered =
      a.weights() - Eigen::MatrixXd::Constant(n, n, 1.0 / static_cast<double>(n));
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(centered, Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) throw std::runtime_error("eigenvalue solver did not converge");
  const double lambda = solver.eigenvalues().cwiseAbs().maxCoeff();
  if (lambda >= 1.0 - 1e-9)
    throw InvariantError("primitive combination matrix",
                         "second eigenvalue magnitude " + std::to_string(lambda) +
                             " is numerically one; the network is disconnected or periodic");
  return lambda;
}

namespace detail {

bool is_primitive_pattern(const std::vector<std::vector<int>>& adj) {
  const std::size_t n = adj.size();
  if (n == 0) return false;
  const auto forward = bfs_levels(adj);
  if (std::any_of(forward.begin(), forward.end(), [](int l) { return l < 0; })) return false;
  std::vector<std::vector<int>> reverse(n);
  for (std::size_t u = 0; u < n; ++u)
    for (int v : adj[u]) reverse[static_cast<std::size_t>(v)].push_back(static_cast<int>(u));
  const auto backward = bfs_levels(reverse);
  if (std::any_of(backward.begin(), backward.end(), [](int l) { return l < 0; })) return false;
  // Period of a strongly connected digraph: gcd over edges u->v of
  // level(u) + 1 - level(v).
  int period = 0;
  for (std::size_t u = 0; u < n; ++u)
    for (int v : adj[u]) period = std::gcd(period, std::abs(forward[u] + 1 - forward[static_cast<std::size_t>(v)]));
  return period == 1;
}

}  // namespace detail

std::string topology_to_yaml(const Topology& topology) {
  YAML::Emitter out;
  out << YAML::BeginMap;
  out << YAML::Key << "num_agents" << YAML::Value << topology.num_agents();
  out << YAML::Key << "edges" << YAML::Value << YAML::BeginSeq;
  for (const Edge& e : topology.edges()) out << YAML::Flow << YAML::BeginSeq << e.first << e.second << YAML::EndSeq;
  out << YAML::EndSeq << YAML::EndMap;
  return std::string(out.c_str()) + "\n";
}

Topology topology_from_yaml(const std::string& text) {
  const YAML::Node root = YAML::Load(text);
  if (!root["num_agents"]) throw std::invalid_argument("topology document lacks num_agents");
  const int n = root["num_agents"].as<int>();
  std::vector<Edge> edges;
  if (const YAML::Node list = root["edges"]) {
    for (const YAML::Node& pair : list) {
      if (!pair.IsSequence() || pair.size() != 2)
        throw std::invalid_argument("edge at line " + std::to_string(pair.Mark().line + 1) +
                                    " must be a two-element list");
      edges.push_back({pair[0].as<int>(), pair[1].as<int>()});
    }
  }
  return Topology(n, std::move(edges));
}

void save_topology(const std::filesystem::path& path, const Topology& topology) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << topology_to_yaml(topology);
}

Topology load_topology(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return topology_from_yaml(buffer.str());
}

}  // namespace dyntrack
