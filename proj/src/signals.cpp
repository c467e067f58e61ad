#include "dyntrack/signals.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <random>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <tuple>
#include <vector>

namespace dyntrack {
namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

// Time-dependent part shared by the scalar and the bulk sampler so both give
// bit-identical values.
struct TimeFactors {
  double transient = 0.0;  // e^{-alpha i} sin(beta i)
  double ramp = 0.0;
};

TimeFactors time_factors(const SignalVariant& variant, Iteration i) {
  const double t = static_cast<double>(i);
  return std::visit(
      overloaded{
          [&](const DecayingSinusoidRamp& m) {
            const bool flipped = m.flip_iteration && i >= *m.flip_iteration;
            return TimeFactors{std::exp(-m.alpha * t) * std::sin(m.beta * t), (flipped ? -m.gamma : m.gamma) * t};
          },
          [&](const PiecewiseRamp& m) {
            const Iteration held = m.hold_iteration ? std::min(i, *m.hold_iteration) : i;
            // slope_k(n) lives in the a-table, so the held time is the multiplier.
            return TimeFactors{static_cast<double>(held), 0.0};
          },
          [&](const ZeroAverage& m) { return TimeFactors{std::exp(-m.alpha * t) * std::sin(m.beta * t), 0.0}; },
          [](const auto&) { return TimeFactors{}; },
      },
      variant);
}

// Sum of a run of values, split in halves recursively; long double throughout.
long double pairwise_sum(const double* v, Eigen::Index n, Eigen::Index stride) {
  if (n <= 8) {
    long double s = 0.0L;
    for (Eigen::Index j = 0; j < n; ++j) s += v[j * stride];
    return s;
  }
  const Eigen::Index half = n / 2;
  return pairwise_sum(v, half, stride) + pairwise_sum(v + half * stride, n - half, stride);
}

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    fields.push_back(line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  for (auto& f : fields) {
    while (!f.empty() && (f.front() == ' ' || f.front() == '\t')) f.remove_prefix(1);
    while (!f.empty() && (f.back() == ' ' || f.back() == '\t' || f.back() == '\r')) f.remove_suffix(1);
  }
  return fields;
}

template <typename T>
T parse_field(std::string_view field, std::size_t line_no, const char* what) {
  T value{};
  const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
  if (ec != std::errc{} || ptr != field.data() + field.size())
    throw std::invalid_argument("trace line " + std::to_string(line_no) + ": bad " + what + " '" +
                                std::string(field) + "'");
  return value;
}

}  // namespace

SignalModel::SignalModel(int num_agents, int dimension, std::uint64_t seed, SignalVariant variant)
    : num_agents_(num_agents), dimension_(dimension), seed_(seed), variant_(std::move(variant)) {
  if (num_agents < 1) throw std::invalid_argument("signal model needs K >= 1");
  if (dimension < 1) throw std::invalid_argument("signal model needs N >= 1");

  std::mt19937_64 gen(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  a_ = Eigen::MatrixXd::Zero(num_agents, dimension);
  b_ = Eigen::MatrixXd::Zero(num_agents, dimension);

  std::visit(overloaded{
                 [&](const StaticSignal& m) {
                   if (m.values) {
                     if (m.values->rows() != num_agents || m.values->cols() != dimension)
                       throw std::invalid_argument("static signal values must be K x N");
                     b_ = *m.values;
                   } else {
                     for (int k = 0; k < num_agents; ++k)
                       for (int n = 0; n < dimension; ++n) b_(k, n) = gauss(gen);
                   }
                 },
                 [&](const PiecewiseRamp& m) {
                   for (int k = 0; k < num_agents; ++k)
                     for (int n = 0; n < dimension; ++n) {
                       b_(k, n) = gauss(gen);
                       a_(k, n) = m.slope * (1.0 + m.spread * gauss(gen));
                     }
                 },
                 [&](const CustomTrace& m) {
                   if (m.frames.empty() || m.frames.begin()->first != 0)
                     throw std::invalid_argument("custom trace must start at iteration 0");
                   for (const auto& [it, frame] : m.frames)
                     if (frame.rows() != num_agents || frame.cols() != dimension)
                       throw std::invalid_argument("custom trace frame " + std::to_string(it) + " is not K x N");
                 },
                 [&](const auto&) {
                   // DecayingSinusoidRamp, ZeroAverage
                   for (int k = 0; k < num_agents; ++k)
                     for (int n = 0; n < dimension; ++n) {
                       a_(k, n) = gauss(gen);
                       b_(k, n) = gauss(gen);
                     }
                 },
             },
             variant_);
}

std::string_view SignalModel::variant_name() const noexcept {
  return std::visit(overloaded{
                        [](const StaticSignal&) { return std::string_view("static"); },
                        [](const DecayingSinusoidRamp&) { return std::string_view("decaying_sinusoid_ramp"); },
                        [](const PiecewiseRamp&) { return std::string_view("piecewise_ramp"); },
                        [](const ZeroAverage&) { return std::string_view("zero_average"); },
                        [](const CustomTrace&) { return std::string_view("custom"); },
                    },
                    variant_);
}

double SignalModel::sample(int agent, Iteration iteration, int coord) const {
  if (agent < 0 || agent >= num_agents_) throw std::out_of_range("agent index " + std::to_string(agent));
  if (coord < 0 || coord >= dimension_) throw std::out_of_range("coordinate index " + std::to_string(coord));
  if (iteration < 0) throw std::out_of_range("negative iteration " + std::to_string(iteration));
  return value(agent, iteration, coord);
}

double SignalModel::value(int k, Iteration i, int n) const {
  if (const auto* trace = std::get_if<CustomTrace>(&variant_)) {
    auto it = trace->frames.upper_bound(i);
    return std::prev(it)->second(k, n);
  }
  const TimeFactors f = time_factors(variant_, i);
  if (std::holds_alternative<ZeroAverage>(variant_) && k == num_agents_ - 1) {
    double sum = 0.0;
    for (int l = 0; l + 1 < num_agents_; ++l) sum += a_(l, n) * f.transient + b_(l, n);
    return -sum;
  }
  return a_(k, n) * f.transient + b_(k, n) + f.ramp;
}

Eigen::MatrixXd SignalModel::sample_all(Iteration iteration) const {
  if (iteration < 0) throw std::out_of_range("negative iteration " + std::to_string(iteration));
  if (const auto* trace = std::get_if<CustomTrace>(&variant_)) return std::prev(trace->frames.upper_bound(iteration))->second;
  const TimeFactors f = time_factors(variant_, iteration);
  Eigen::MatrixXd r(num_agents_, dimension_);
  for (int k = 0; k < num_agents_; ++k)
    for (int n = 0; n < dimension_; ++n) r(k, n) = a_(k, n) * f.transient + b_(k, n) + f.ramp;
  if (std::holds_alternative<ZeroAverage>(variant_)) {
    for (int n = 0; n < dimension_; ++n) {
      double sum = 0.0;
      for (int l = 0; l + 1 < num_agents_; ++l) sum += r(l, n);
      r(num_agents_ - 1, n) = -sum;
    }
  }
  return r;
}

Eigen::VectorXd SignalModel::true_average(Iteration iteration) const {
  if (std::holds_alternative<ZeroAverage>(variant_)) return Eigen::VectorXd::Zero(dimension_);
  const Eigen::MatrixXd r = sample_all(iteration);
  Eigen::VectorXd avg(dimension_);
  for (int n = 0; n < dimension_; ++n)
    avg(n) = static_cast<double>(pairwise_sum(r.col(n).data(), num_agents_, 1) /
                                 static_cast<long double>(num_agents_));
  return avg;
}

SignalModel SignalModel::from_trace_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read trace " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return from_trace_csv_text(buffer.str());
}

SignalModel SignalModel::from_trace_csv_text(std::string_view text) {
  std::vector<std::tuple<Iteration, int, int, double>> rows;
  std::size_t line_no = 0;
  bool header_seen = false;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto eol = text.find('\n', pos);
    std::string_view line = text.substr(pos, eol == std::string_view::npos ? std::string_view::npos : eol - pos);
    pos = eol == std::string_view::npos ? text.size() + 1 : eol + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.find_first_not_of(" \t") == std::string_view::npos) continue;
    const auto fields = split_fields(line);
    if (!header_seen) {
      if (fields.size() != 4 || fields[0] != "iter" || fields[1] != "agent" || fields[2] != "coord" ||
          fields[3] != "value")
        throw std::invalid_argument("trace line " + std::to_string(line_no) +
                                    ": expected header 'iter,agent,coord,value'");
      header_seen = true;
      continue;
    }
    if (fields.size() != 4)
      throw std::invalid_argument("trace line " + std::to_string(line_no) + ": expected 4 fields");
    rows.emplace_back(parse_field<Iteration>(fields[0], line_no, "iteration"),
                      parse_field<int>(fields[1], line_no, "agent"), parse_field<int>(fields[2], line_no, "coord"),
                      parse_field<double>(fields[3], line_no, "value"));
  }
  if (!header_seen) throw std::invalid_argument("trace is empty");
  if (rows.empty()) throw std::invalid_argument("trace has no data rows");

  int num_agents = 0;
  int dimension = 0;
  for (const auto& [it, k, n, v] : rows) {
    if (it < 0 || k < 0 || n < 0) throw std::invalid_argument("trace indices must be nonnegative");
    num_agents = std::max(num_agents, k + 1);
    dimension = std::max(dimension, n + 1);
  }
  CustomTrace trace;
  std::set<std::tuple<Iteration, int, int>> seen;
  for (const auto& [it, k, n, v] : rows) {
    if (!seen.emplace(it, k, n).second)
      throw std::invalid_argument("trace repeats (iter,agent,coord) = (" + std::to_string(it) + "," +
                                  std::to_string(k) + "," + std::to_string(n) + ")");
    auto [frame, inserted] = trace.frames.try_emplace(it, Eigen::MatrixXd::Zero(num_agents, dimension));
    frame->second(k, n) = v;
  }
  const std::size_t per_frame = static_cast<std::size_t>(num_agents) * static_cast<std::size_t>(dimension);
  if (seen.size() != per_frame * trace.frames.size())
    throw std::invalid_argument("trace frames are incomplete: every iteration needs all K x N values");
  return SignalModel(num_agents, dimension, 0, std::move(trace));
}

}  // namespace dyntrack
