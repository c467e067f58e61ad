#include "dyntrack/metrics.hpp"

#include "dyntrack/rng.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace dyntrack {
namespace {

constexpr double kFitFloor = 1e-13;
constexpr int kMinFitSamples = 20;

// Draw sequence for products: iteration t of trial j uses stream (seed, j, t).
SelectionDraw product_draw(std::uint64_t seed, int trial, int t, int num_agents, int dimension,
                           SelectionMode mode) {
  return draw_selection(stream_key(seed, trial), t, num_agents, dimension, mode);
}

}  // namespace

MetricsRecord record(const Eigen::MatrixXd& estimate, const Eigen::VectorXd& truth, Iteration iteration,
                     std::int64_t cumulative_scalars_sent) {
  if (estimate.cols() != truth.size())
    throw std::invalid_argument("estimate has " + std::to_string(estimate.cols()) + " entries, truth has " +
                                std::to_string(truth.size()));
  const Eigen::MatrixXd diff = estimate.rowwise() - truth.transpose();
  MetricsRecord rec;
  rec.iteration = iteration;
  rec.per_entry_msd = diff.array().square().colwise().mean().transpose();
  rec.aggregate_msd = rec.per_entry_msd.sum();
  rec.max_norm_err = diff.cwiseAbs().maxCoeff();
  rec.cumulative_scalars_sent = cumulative_scalars_sent;
  return rec;
}

MetricsRecord record(const NetworkRun& run, const Eigen::VectorXd& truth) {
  return record(output(run), truth, run.iteration,
                run.iteration * scalars_per_iteration(run.algorithm, run.dimension()));
}

double entry_max_error(const Eigen::MatrixXd& estimate, const Eigen::VectorXd& truth, int entry) {
  if (entry < 0 || entry >= truth.size()) throw std::out_of_range("entry " + std::to_string(entry));
  return (estimate.col(entry).array() - truth(entry)).abs().maxCoeff();
}

RateFit fit_geometric_rate(const std::vector<std::pair<Iteration, double>>& series) {
  const std::size_t start = series.size() / 10;
  std::vector<double> xs;
  std::vector<double> ys;
  for (std::size_t j = start; j < series.size(); ++j) {
    const auto [i, e] = series[j];
    if (!(e > 0.0))
      throw std::invalid_argument("non-positive error " + std::to_string(e) + " at iteration " + std::to_string(i));
    if (e < kFitFloor) break;
    xs.push_back(static_cast<double>(i));
    ys.push_back(std::log(e));
  }
  if (xs.size() < static_cast<std::size_t>(kMinFitSamples))
    throw std::invalid_argument("rate fit needs at least 20 samples above the floor, got " +
                                std::to_string(xs.size()));
  const auto n = static_cast<Eigen::Index>(xs.size());
  const Eigen::Map<const Eigen::VectorXd> x(xs.data(), n);
  const Eigen::Map<const Eigen::VectorXd> y(ys.data(), n);
  const Eigen::VectorXd xc = x.array() - x.mean();
  const Eigen::VectorXd yc = y.array() - y.mean();
  const double sxx = xc.squaredNorm();
  const double slope = xc.dot(yc) / sxx;
  const double ss_tot = yc.squaredNorm();
  const double ss_res = (yc - slope * xc).squaredNorm();
  RateFit fit;
  fit.rate = std::exp(slope);
  fit.r_squared = ss_tot > 0.0 ? 1.0 - ss_res / ss_tot : 1.0;
  fit.samples = static_cast<int>(n);
  return fit;
}

double perturbation_msd_bound(double lambda, int dimension, double epsilon) {
  const double gap = 1.0 - lambda;
  return 2.0 * lambda * lambda * (2.0 * dimension - 1.0) * epsilon / (gap * gap);
}

double final_quartile_max(const std::vector<double>& values) {
  if (values.empty()) throw std::invalid_argument("empty series");
  const std::size_t start = values.size() - std::max<std::size_t>(1, values.size() / 4);
  return *std::max_element(values.begin() + static_cast<std::ptrdiff_t>(start), values.end());
}

bool steady_state_bound_check(const std::vector<double>& msd, double lambda, int dimension, double epsilon,
                              double floor) {
  return final_quartile_max(msd) <= perturbation_msd_bound(lambda, dimension, epsilon) * (1.0 + kSteadyStateSlack) + floor;
}

double rank_one_distance(const Eigen::MatrixXd& product) {
  const Eigen::VectorXd phi = product.rowwise().mean();
  return (product.colwise() - phi).cwiseAbs().maxCoeff();
}

std::vector<double> ergodicity_profile(const CombinationMatrix& a, int dimension, const std::vector<int>& lengths,
                                       int trials, std::uint64_t seed, SelectionMode mode) {
  if (lengths.empty() || !std::is_sorted(lengths.begin(), lengths.end()) || lengths.front() < 1)
    throw std::invalid_argument("lengths must be ascending and positive");
  const int K = a.num_agents();
  std::vector<double> sums(lengths.size(), 0.0);
  for (int j = 0; j < trials; ++j) {
    Eigen::MatrixXd product = Eigen::MatrixXd::Identity(K, K);
    std::size_t next = 0;
    for (int t = 1; t <= lengths.back(); ++t) {
      product = effective_matrix(a, product_draw(seed, j, t, K, dimension, mode), 0) * product;
      while (next < lengths.size() && lengths[next] == t) sums[next++] += rank_one_distance(product);
    }
  }
  for (double& s : sums) s /= trials;
  return sums;
}

DobrushinEstimate dobrushin_estimate(const CombinationMatrix& a, int dimension, int window, int trials,
                                     std::uint64_t seed, SelectionMode mode) {
  if (window < 1 || trials < 1) throw std::invalid_argument("window and trials must be positive");
  const int K = a.num_agents();
  double total = 0.0;
  for (int j = 0; j < trials; ++j) {
    Eigen::MatrixXd product = Eigen::MatrixXd::Identity(K, K);
    for (int t = 1; t <= window; ++t) product = effective_matrix(a, product_draw(seed, j, t, K, dimension, mode), 0) * product;
    total += dobrushin(product);
  }
  DobrushinEstimate est;
  est.window = window;
  est.xi = total / trials;
  est.rate = std::pow(est.xi, 1.0 / window);
  return est;
}

}  // namespace dyntrack
