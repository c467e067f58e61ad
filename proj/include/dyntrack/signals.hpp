#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string_view>
#include <variant>

namespace dyntrack {

using Iteration = std::int64_t;

/// r_k(n) constant in time. Explicit values win; otherwise b_k(n) ~ N(0, 1).
struct StaticSignal {
  std::optional<Eigen::MatrixXd> values;
};

/// r_{k,i}(n) = a_k(n) e^{-alpha i} sin(beta i) + b_k(n) + gamma i, with the
/// ramp sign reversed from `flip_iteration` on.
struct DecayingSinusoidRamp {
  double alpha = 0.01;
  double beta = 0.1;
  double gamma = 2.5e-4;
  std::optional<Iteration> flip_iteration;
};

/// r_{k,i}(n) = b_k(n) + slope_k(n) * min(i, hold_iteration), with
/// slope_k(n) = slope * (1 + spread * g_k(n)), g ~ N(0, 1).
struct PiecewiseRamp {
  double slope = 1e-3;
  double spread = 0.0;
  std::optional<Iteration> hold_iteration;
};

/// Agents 0..K-2 carry b_k(n) + a_k(n) e^{-alpha i} sin(beta i); agent K-1
/// carries the negated sum, so the network sum is zero by construction.
struct ZeroAverage {
  double alpha = 0.01;
  double beta = 0.1;
};

/// Externally supplied frames, iteration -> K x N. Sample-and-hold between
/// frames; iteration 0 must be present.
struct CustomTrace {
  std::map<Iteration, Eigen::MatrixXd> frames;
};

using SignalVariant = std::variant<StaticSignal, DecayingSinusoidRamp, PiecewiseRamp, ZeroAverage, CustomTrace>;

/// Deterministic generator of the observations r_{k,i}(n).
///
/// Random coefficients are drawn once at construction from std::mt19937_64
/// seeded with `seed`, in agent-major, coordinate-minor order; at each (k, n)
/// the draws are taken in the order a, b (sinusoid models) or b, g (ramp).
/// After construction the model is immutable and sampling is a pure function.
class SignalModel {
 public:
  SignalModel(int num_agents, int dimension, std::uint64_t seed, SignalVariant variant);

  /// Loads a CustomTrace from CSV with header `iter,agent,coord,value`.
  static SignalModel from_trace_csv(const std::filesystem::path& path);
  static SignalModel from_trace_csv_text(std::string_view text);

  int num_agents() const noexcept { return num_agents_; }
  int dimension() const noexcept { return dimension_; }
  std::uint64_t seed() const noexcept { return seed_; }
  const SignalVariant& variant() const noexcept { return variant_; }
  std::string_view variant_name() const noexcept;

  /// r_{k,i}(n); throws std::out_of_range for bad indices.
  double sample(int agent, Iteration iteration, int coord) const;

  /// All of r_{.,i}(.) as a K x N matrix; entrywise identical to sample().
  Eigen::MatrixXd sample_all(Iteration iteration) const;

  /// Exact network mean (1/K) sum_k r_{k,i}, accumulated pairwise in long
  /// double.
  Eigen::VectorXd true_average(Iteration iteration) const;

 private:
  double value(int agent, Iteration iteration, int coord) const;

  int num_agents_;
  int dimension_;
  std::uint64_t seed_;
  SignalVariant variant_;
  Eigen::MatrixXd a_;
  Eigen::MatrixXd b_;
};

}  // namespace dyntrack
