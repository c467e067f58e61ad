#pragma once

#include "dyntrack/graph.hpp"
#include "dyntrack/signals.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

namespace dyntrack {

enum class AlgorithmId {
  Consensus,         // dynamic average consensus
  Diffusion,         // dynamic average diffusion (exact diffusion with mu = 1)
  ExactDiffusion,    // exact diffusion with general mu, stepped through psi/phi
  Extra,             // EXTRA-based tracker, mu = 1
  Diging,            // DIGing-based gradient tracker, mu = 1
  SyncCoord,         // one shared random coordinate per iteration
  IndepCoord,        // per-agent random coordinates with push-sum correction
  IndepCoordNoPush,  // per-agent random coordinates, no correction (biased)
};

struct AlgorithmSpec {
  AlgorithmId id = AlgorithmId::Diffusion;
  double mu = 1.0;  // only read by ExactDiffusion

  bool operator==(const AlgorithmSpec&) const = default;
};

/// Parses ids such as "sync_coord" or "exact_diffusion(0.5)".
AlgorithmSpec parse_algorithm(std::string_view text);
std::string to_string(const AlgorithmSpec& spec);
/// File-name friendly label, e.g. "exact_diffusion_0.5".
std::string label(const AlgorithmSpec& spec);

/// Scalars each agent transmits per iteration: N for full-vector schemes, 2N
/// for DIGing, 2 for the shared-coordinate scheme (w entry plus signal
/// difference) and 3 with push-sum (plus the p entry).
int scalars_per_iteration(const AlgorithmSpec& spec, int dimension);

bool is_coordinate_algorithm(AlgorithmId id);

enum class SelectionMode { Shared, Independent };

/// Coordinate picked by every agent in one iteration.
struct SelectionDraw {
  std::vector<int> indices;
  SelectionMode mode = SelectionMode::Independent;
};

/// Uniform draws from per-(seed, iteration, agent) streams, so the draw of an
/// agent never depends on execution order. Shared mode hands every agent the
/// draw of agent 0.
SelectionDraw draw_selection(std::uint64_t seed, Iteration iteration, int num_agents, int dimension,
                             SelectionMode mode);

/// Snapshot of one agent's vectors; rows of the NetworkState matrices.
struct AgentState {
  Eigen::VectorXd w;
  Eigen::VectorXd v;
  Eigen::VectorXd p;
  Eigen::VectorXd psi;
  Eigen::VectorXd y;
  Eigen::VectorXd w_prev;
  Eigen::VectorXd r_last;
};

/// Network-wide state, one row per agent (K x N each).
struct NetworkState {
  Eigen::MatrixXd w;       // w_{k,i}
  Eigen::MatrixXd w_prev;  // w_{k,i-1}
  Eigen::MatrixXd r_last;  // last full observation, full-vector schemes
  Eigen::MatrixXd v;       // last observed entry values, coordinate schemes
  Eigen::MatrixXd p;       // push-sum weights
  Eigen::MatrixXd psi;     // exact diffusion adapt step
  Eigen::MatrixXd y;       // DIGing tracker
  std::vector<char> frozen;
};

/// One simulated network: mixing weights, signal, algorithm and state.
///
/// Every step reads only the iteration i-1 state and writes iteration i, so
/// agents never see a partially updated neighbor.
struct NetworkRun {
  CombinationMatrix combination;
  std::shared_ptr<const SignalModel> model;
  AlgorithmSpec algorithm;
  std::uint64_t seed = 0;
  Iteration iteration = 0;
  NetworkState state;

  int num_agents() const { return combination.num_agents(); }
  int dimension() const { return model->dimension(); }
  AgentState agent(int k) const;
};

/// Initial state: w = v = r_0, w_prev = psi = r_0, p = 1, y = 0, i = 0.
NetworkRun start_run(CombinationMatrix combination, std::shared_ptr<const SignalModel> model,
                     AlgorithmSpec algorithm, std::uint64_t seed);

void step_dynamic_consensus(NetworkRun& run);
/// Combined two-term recursion in w_{i-1}, w_{i-2}; mu = 1 is dynamic average
/// diffusion.
void step_dynamic_diffusion(NetworkRun& run, double mu = 1.0);
/// The same recursion stepped through its adapt / correct / combine stages.
void step_exact_diffusion(NetworkRun& run, double mu);
void step_extra_based(NetworkRun& run);
void step_diging_based(NetworkRun& run);
void step_sync_coordinate(NetworkRun& run);
/// Push-sum coordinate scheme. `mode = Shared` forces one common index and is
/// meant for checking the reduction to the shared-coordinate scheme.
void step_indep_coordinate(NetworkRun& run, SelectionMode mode = SelectionMode::Independent);
void step_indep_coordinate_nopush(NetworkRun& run);

/// Shared-coordinate update fed with the true previous observation entry
/// instead of the v memory. Not implementable by real agents (it needs the
/// full observation history); kept as a test oracle.
void step_sync_coordinate_oracle(NetworkRun& run);

/// Dispatches on run.algorithm.
void step(NetworkRun& run);

/// The tracked estimate: w / p entrywise for the push-sum scheme, w otherwise.
Eigen::MatrixXd output(const NetworkRun& run);

/// Realized per-entry mixing K_c + A^T K for coordinate `coord`, where K marks
/// the agents whose draw equals `coord`. Column stochastic.
Eigen::MatrixXd effective_matrix(const CombinationMatrix& a, const SelectionDraw& draw, int coord);

/// Dobrushin ergodicity coefficient of a column-stochastic matrix,
/// (1/2) max_{k,k'} sum_l |m(l,k) - m(l,k')|.
template <typename Derived>
double dobrushin(const Eigen::MatrixBase<Derived>& m) {
  using Scalar = typename Derived::Scalar;
  if (m.rows() != m.cols()) throw std::invalid_argument("dobrushin: matrix must be square");
  const auto deviation = (m.colwise().sum().array() - Scalar(1)).abs().maxCoeff();
  if (!(deviation <= Scalar(1e-9))) throw std::invalid_argument("dobrushin: matrix is not column stochastic");
  Scalar worst(0);
  for (Eigen::Index k = 0; k < m.cols(); ++k)
    for (Eigen::Index kk = k + 1; kk < m.cols(); ++kk)
      worst = std::max<Scalar>(worst, (m.col(k) - m.col(kk)).cwiseAbs().sum());
  return static_cast<double>(worst / Scalar(2));
}

/// Stopping rule ||w_{k,i} - w_{k,i-1}|| <= epsilon per agent. Pure.
std::vector<char> check_stop(const NetworkRun& run, double epsilon);

/// Marks agents as stopped: they keep their state and stop observing, but
/// neighbors still read it.
void freeze_agents(NetworkRun& run, const std::vector<char>& flags);

/// Serializable run state; with the same combination matrix and signal model
/// it resumes the uninterrupted trajectory bit for bit.
struct Checkpoint {
  AlgorithmSpec algorithm;
  std::uint64_t seed = 0;
  Iteration iteration = 0;
  NetworkState state;
};

Checkpoint make_checkpoint(const NetworkRun& run);
NetworkRun resume_run(CombinationMatrix combination, std::shared_ptr<const SignalModel> model,
                      const Checkpoint& checkpoint);
std::string checkpoint_to_yaml(const Checkpoint& checkpoint);
Checkpoint checkpoint_from_yaml(const std::string& text);

}  // namespace dyntrack
