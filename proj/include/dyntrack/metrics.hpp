#pragma once

#include "dyntrack/algorithms.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <utility>
#include <vector>

namespace dyntrack {

struct MetricsRecord {
  Iteration iteration = 0;
  Eigen::VectorXd per_entry_msd;  // (1/K) sum_k (out(k,n) - truth(n))^2
  double aggregate_msd = 0.0;     // sum over entries of per_entry_msd
  double max_norm_err = 0.0;      // max_k ||out_k - truth||_inf
  std::int64_t cumulative_scalars_sent = 0;  // per agent, since iteration 0
};

/// Error statistics of an estimate matrix (K x N) against the true average.
MetricsRecord record(const Eigen::MatrixXd& estimate, const Eigen::VectorXd& truth, Iteration iteration,
                     std::int64_t cumulative_scalars_sent);

/// Statistics of the run's output variable (x for push-sum, w otherwise).
MetricsRecord record(const NetworkRun& run, const Eigen::VectorXd& truth);

/// Max-norm error restricted to one entry: max_k |out(k,n) - truth(n)|.
double entry_max_error(const Eigen::MatrixXd& estimate, const Eigen::VectorXd& truth, int entry);

struct RateFit {
  double rate = 0.0;
  double r_squared = 0.0;
  int samples = 0;
};

/// Least-squares slope of log(error) against iteration, exponentiated.
/// Drops the first 10% of the series as burn-in and cuts the window at the
/// first value below 1e-13. Throws std::invalid_argument on a non-positive
/// value inside the window or when fewer than 20 samples remain.
RateFit fit_geometric_rate(const std::vector<std::pair<Iteration, double>>& series);

/// 2 lambda^2 (2N - 1) eps / (1 - lambda)^2.
double perturbation_msd_bound(double lambda, int dimension, double epsilon);

inline constexpr double kSteadyStateSlack = 0.25;
inline constexpr double kNumericalFloor = 1e-20;

/// Max over the final quartile of `msd` against the bound with 25% slack.
/// `floor` absorbs round-off when the bound degenerates to zero.
bool steady_state_bound_check(const std::vector<double>& msd, double lambda, int dimension, double epsilon,
                              double floor = kNumericalFloor);

/// Largest value in the final quartile of a series.
double final_quartile_max(const std::vector<double>& values);

/// ||P - phi 1^T||_max with phi the mean column of P. Zero iff all columns
/// agree, i.e. P is rank one in the ergodic sense.
double rank_one_distance(const Eigen::MatrixXd& product);

/// Mean rank_one_distance of products of L sampled effective matrices for
/// every L in `lengths` (ascending), over `trials` independent draw
/// sequences. Products are taken for coordinate 0.
std::vector<double> ergodicity_profile(const CombinationMatrix& a, int dimension, const std::vector<int>& lengths,
                                       int trials, std::uint64_t seed, SelectionMode mode);

struct DobrushinEstimate {
  int window = 0;     // T
  double xi = 0.0;    // mean Dobrushin coefficient of a T-fold product
  double rate = 0.0;  // xi^(1/T)
};

/// Mean Dobrushin coefficient of products of `window` effective matrices and
/// the implied per-iteration contraction.
DobrushinEstimate dobrushin_estimate(const CombinationMatrix& a, int dimension, int window, int trials,
                                     std::uint64_t seed, SelectionMode mode);

}  // namespace dyntrack
