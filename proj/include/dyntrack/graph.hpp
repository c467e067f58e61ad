#pragma once

#include <Eigen/Dense>

#include <compare>
#include <cstdint>
#include <filesystem>
#include <numeric>
#include <queue>
#include <string>
#include <vector>

namespace dyntrack {

/// Undirected edge between two agents, stored with `first < second`.
struct Edge {
  int first = 0;
  int second = 0;
  auto operator<=>(const Edge&) const = default;
};

/// Undirected network of `num_agents` agents. Self-influence is implicit, so
/// self-pairs are not edges. Edges are kept sorted and unique.
class Topology {
 public:
  Topology(int num_agents, std::vector<Edge> edges);

  int num_agents() const noexcept { return num_agents_; }
  const std::vector<Edge>& edges() const noexcept { return edges_; }

  std::vector<int> degrees() const;
  std::vector<std::vector<int>> neighbors() const;
  bool is_connected() const;

  bool operator==(const Topology&) const = default;

 private:
  int num_agents_;
  std::vector<Edge> edges_;
};

/// Agents at seeded uniform points in the unit square, joined when their
/// Euclidean distance is below `radius`. The result may be disconnected.
Topology build_random_geometric(int num_agents, double radius, std::uint64_t seed);

/// Redraws with seed, seed+1, ... until the geometric graph is connected;
/// throws after `max_attempts` disconnected draws.
Topology build_connected_random_geometric(int num_agents, double radius, std::uint64_t seed,
                                          int max_attempts = 100);

Topology build_cycle(int num_agents);
Topology build_complete(int num_agents);

/// Symmetric doubly stochastic mixing weights a(l, k) >= 0 with at least one
/// positive diagonal entry. Construction validates all of it.
class CombinationMatrix {
 public:
  static constexpr double kStochasticTolerance = 1e-12;

  explicit CombinationMatrix(Eigen::MatrixXd weights);

  const Eigen::MatrixXd& weights() const noexcept { return weights_; }
  int num_agents() const noexcept { return static_cast<int>(weights_.rows()); }
  double operator()(Eigen::Index l, Eigen::Index k) const { return weights_(l, k); }

 private:
  Eigen::MatrixXd weights_;
};

/// Metropolis-Hastings rule: a(l,k) = 1 / (1 + max(deg l, deg k)) on edges,
/// remainder on the diagonal. Rejects disconnected topologies.
CombinationMatrix metropolis_weights(const Topology& topology);

/// Second largest eigenvalue magnitude, i.e. the spectral norm of A - 11^T/K.
/// Throws InvariantError when the value is within 1e-9 of one (A not primitive).
double second_eigenvalue_magnitude(const CombinationMatrix& a);

namespace detail {

inline std::vector<std::vector<int>> positive_pattern(const Eigen::Ref<const Eigen::MatrixXd>& m) {
  std::vector<std::vector<int>> out(static_cast<std::size_t>(m.rows()));
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j)
      if (m(i, j) > 0) out[static_cast<std::size_t>(i)].push_back(static_cast<int>(j));
  return out;
}

inline std::vector<int> bfs_levels(const std::vector<std::vector<int>>& adj) {
  std::vector<int> level(adj.size(), -1);
  if (adj.empty()) return level;
  std::queue<int> frontier;
  level[0] = 0;
  frontier.push(0);
  while (!frontier.empty()) {
    const int u = frontier.front();
    frontier.pop();
    for (int v : adj[static_cast<std::size_t>(u)]) {
      if (level[static_cast<std::size_t>(v)] < 0) {
        level[static_cast<std::size_t>(v)] = level[static_cast<std::size_t>(u)] + 1;
        frontier.push(v);
      }
    }
  }
  return level;
}

bool is_primitive_pattern(const std::vector<std::vector<int>>& adj);

}  // namespace detail

/// True iff the directed graph of positive entries is strongly connected and
/// aperiodic. Works for any square nonnegative matrix expression.
template <typename Derived>
bool is_primitive(const Eigen::MatrixBase<Derived>& m) {
  if (m.rows() != m.cols() || m.rows() == 0) return false;
  const Eigen::MatrixXd dense = m.template cast<double>();
  return detail::is_primitive_pattern(detail::positive_pattern(dense));
}

inline bool is_primitive(const CombinationMatrix& a) { return is_primitive(a.weights()); }

/// Smallest T with every entry of M^T positive, or -1 if M is not primitive.
template <typename Derived>
int primitivity_exponent(const Eigen::MatrixBase<Derived>& m) {
  if (!is_primitive(m)) return -1;
  const Eigen::Index n = m.rows();
  Eigen::MatrixXi pattern = (m.array() > 0).template cast<int>();
  Eigen::MatrixXi power = pattern;
  // Wielandt: (n-1)^2 + 1 steps always suffice.
  const int limit = static_cast<int>((n - 1) * (n - 1) + 1);
  for (int t = 1; t <= limit; ++t) {
    if ((power.array() > 0).all()) return t;
    power = ((power * pattern).array() > 0).template cast<int>();
  }
  return -1;
}

std::string topology_to_yaml(const Topology& topology);
Topology topology_from_yaml(const std::string& text);
void save_topology(const std::filesystem::path& path, const Topology& topology);
Topology load_topology(const std::filesystem::path& path);

}  // namespace dyntrack
