#include "dyntrack/algorithms.hpp"

#include "dyntrack/errors.hpp"
#include "dyntrack/rng.hpp"

#include <charconv>
#include <random>
#include <stdexcept>

namespace dyntrack {
namespace {

constexpr double kMinPushSumWeight = 1e-300;

// out.row(k) = sum_l a(l,k) * m.row(l), summed in ascending l from zero and
// skipping zero weights. The coordinate kernel uses the same order, which is
// what makes the N = 1 reduction bit-exact.
Eigen::MatrixXd combine(const CombinationMatrix& a, const Eigen::MatrixXd& m) {
  const int K = a.num_agents();
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(m.rows(), m.cols());
  for (int k = 0; k < K; ++k)
    for (int l = 0; l < K; ++l) {
      const double weight = a(l, k);
      if (weight != 0.0) out.row(k) += weight * m.row(l);
    }
  return out;
}

// Frozen agents keep their row of `current`.
void commit_rows(Eigen::MatrixXd& current, const Eigen::MatrixXd& next, const std::vector<char>& frozen) {
  for (Eigen::Index k = 0; k < current.rows(); ++k)
    if (!frozen[static_cast<std::size_t>(k)]) current.row(k) = next.row(k);
}

// Observation matrix for iteration i; frozen agents stop observing and
// report their last observation instead.
Eigen::MatrixXd observe(const NetworkRun& run, Iteration i) {
  Eigen::MatrixXd r = run.model->sample_all(i);
  for (int k = 0; k < run.num_agents(); ++k)
    if (run.state.frozen[static_cast<std::size_t>(k)]) r.row(k) = run.state.r_last.row(k);
  return r;
}

void finish_full_vector(NetworkRun& run, Eigen::MatrixXd next_w, const Eigen::MatrixXd& r) {
  auto& s = run.state;
  s.w_prev = s.w;
  commit_rows(s.w, next_w, s.frozen);
  s.r_last = r;  // frozen rows of r already equal r_last
  ++run.iteration;
}

void require_full_vector(const NetworkRun& run) {
  if (run.model->num_agents() != run.num_agents())
    throw std::invalid_argument("signal model and combination matrix disagree on K");
}

enum class StaleSource { Memory, TruePrevious };

// One coordinate iteration shared by the shared-index, push-sum and biased
// schemes. Agent l broadcasts (w_l(n^l) + r_l(n^l) - v_l(n^l)) for its index
// n^l; every agent k zeroes its own selected entry and accumulates
// a(l,k) * message into entry n^l. Push-sum weights follow the same matrix.
void coordinate_iteration(NetworkRun& run, const SelectionDraw& draw, bool push_sum, StaleSource stale) {
  auto& s = run.state;
  const int K = run.num_agents();
  const Iteration i = run.iteration + 1;

  std::vector<double> obs(static_cast<std::size_t>(K));
  std::vector<double> message(static_cast<std::size_t>(K));
  std::vector<double> weight_message(static_cast<std::size_t>(K));
  for (int l = 0; l < K; ++l) {
    const auto ul = static_cast<std::size_t>(l);
    const int n = draw.indices[ul];
    if (s.frozen[ul]) {
      obs[ul] = s.v(l, n);
    } else {
      obs[ul] = run.model->sample(l, i, n);
    }
    const double previous =
        stale == StaleSource::Memory || s.frozen[ul] ? s.v(l, n) : run.model->sample(l, i - 1, n);
    message[ul] = (s.w(l, n) + obs[ul]) - previous;
    weight_message[ul] = s.p(l, n);
  }

  Eigen::MatrixXd next_w = s.w;
  Eigen::MatrixXd next_p = s.p;
  for (int k = 0; k < K; ++k) {
    if (s.frozen[static_cast<std::size_t>(k)]) continue;
    const int n = draw.indices[static_cast<std::size_t>(k)];
    next_w(k, n) = 0.0;
    if (push_sum) next_p(k, n) = 0.0;
  }
  for (int l = 0; l < K; ++l) {
    const auto ul = static_cast<std::size_t>(l);
    const int n = draw.indices[ul];
    for (int k = 0; k < K; ++k) {
      const double weight = run.combination(l, k);
      if (weight == 0.0 || s.frozen[static_cast<std::size_t>(k)]) continue;
      next_w(k, n) += weight * message[ul];
      if (push_sum) next_p(k, n) += weight * weight_message[ul];
    }
  }

  if (push_sum) {
    for (int k = 0; k < K; ++k)
      for (int n = 0; n < run.dimension(); ++n)
        if (!(next_p(k, n) >= kMinPushSumWeight))
          throw InvariantError("push-sum weight positivity",
                               "p(" + std::to_string(k) + "," + std::to_string(n) + ") = " +
                                   std::to_string(next_p(k, n)) + " at iteration " + std::to_string(i));
    s.p = std::move(next_p);
  }
  s.w_prev = s.w;
  s.w = std::move(next_w);
  for (int k = 0; k < K; ++k) {
    const auto uk = static_cast<std::size_t>(k);
    if (!s.frozen[uk]) s.v(k, draw.indices[uk]) = obs[uk];
  }
  ++run.iteration;
}

void require_mu(double mu) {
  if (!(mu > 0.0 && mu <= 1.0)) throw std::invalid_argument("mu must lie in (0, 1], got " + std::to_string(mu));
}

}  // namespace

AlgorithmSpec parse_algorithm(std::string_view text) {
  struct Name {
    std::string_view name;
    AlgorithmId id;
  };
  static constexpr Name kNames[] = {
      {"consensus", AlgorithmId::Consensus},
      {"diffusion", AlgorithmId::Diffusion},
      {"exact_diffusion", AlgorithmId::ExactDiffusion},
      {"extra", AlgorithmId::Extra},
      {"diging", AlgorithmId::Diging},
      {"sync_coord", AlgorithmId::SyncCoord},
      {"indep_coord", AlgorithmId::IndepCoord},
      {"indep_coord_nopush", AlgorithmId::IndepCoordNoPush},
  };
  std::string_view head = text;
  std::string_view arg;
  if (const auto open = text.find('('); open != std::string_view::npos) {
    if (text.back() != ')') throw std::invalid_argument("malformed algorithm id '" + std::string(text) + "'");
    head = text.substr(0, open);
    arg = text.substr(open + 1, text.size() - open - 2);
  }
  for (const auto& [name, id] : kNames) {
    if (head != name) continue;
    AlgorithmSpec spec{id, 1.0};
    if (!arg.empty()) {
      if (id != AlgorithmId::ExactDiffusion)
        throw std::invalid_argument("algorithm '" + std::string(head) + "' takes no parameter");
      const auto [ptr, ec] = std::from_chars(arg.data(), arg.data() + arg.size(), spec.mu);
      if (ec != std::errc{} || ptr != arg.data() + arg.size())
        throw std::invalid_argument("bad mu in '" + std::string(text) + "'");
    }
    if (id == AlgorithmId::ExactDiffusion) require_mu(spec.mu);
    return spec;
  }
  throw std::invalid_argument("unknown algorithm '" + std::string(text) + "'");
}

std::string to_string(const AlgorithmSpec& spec) {
  switch (spec.id) {
    case AlgorithmId::Consensus: return "consensus";
    case AlgorithmId::Diffusion: return "diffusion";
    case AlgorithmId::ExactDiffusion: {
      char buf[32];
      const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, spec.mu);
      return "exact_diffusion(" + std::string(buf, ptr) + ")";
    }
    case AlgorithmId::Extra: return "extra";
    case AlgorithmId::Diging: return "diging";
    case AlgorithmId::SyncCoord: return "sync_coord";
    case AlgorithmId::IndepCoord: return "indep_coord";
    case AlgorithmId::IndepCoordNoPush: return "indep_coord_nopush";
  }
  throw std::logic_error("unhandled algorithm id");
}

std::string label(const AlgorithmSpec& spec) {
  std::string out;
  for (char c : to_string(spec)) {
    if (c == '(') out += '_';
    else if (c != ')') out += c;
  }
  return out;
}

int scalars_per_iteration(const AlgorithmSpec& spec, int dimension) {
  switch (spec.id) {
    case AlgorithmId::Diging: return 2 * dimension;
    case AlgorithmId::SyncCoord:
    case AlgorithmId::IndepCoordNoPush: return 2;
    case AlgorithmId::IndepCoord: return 3;
    default: return dimension;
  }
}

bool is_coordinate_algorithm(AlgorithmId id) {
  return id == AlgorithmId::SyncCoord || id == AlgorithmId::IndepCoord || id == AlgorithmId::IndepCoordNoPush;
}

SelectionDraw draw_selection(std::uint64_t seed, Iteration iteration, int num_agents, int dimension,
                             SelectionMode mode) {
  if (dimension < 1) throw std::invalid_argument("selection needs N >= 1");
  std::uniform_int_distribution<int> pick(0, dimension - 1);
  SelectionDraw draw;
  draw.mode = mode;
  draw.indices.resize(static_cast<std::size_t>(num_agents));
  for (int k = 0; k < num_agents; ++k) {
    if (mode == SelectionMode::Shared && k > 0) {
      draw.indices[static_cast<std::size_t>(k)] = draw.indices[0];
      continue;
    }
    CounterRng gen(stream_key(seed, iteration, k));
    draw.indices[static_cast<std::size_t>(k)] = pick(gen);
  }
  return draw;
}

AgentState NetworkRun::agent(int k) const {
  return {state.w.row(k).transpose(),      state.v.row(k).transpose(),   state.p.row(k).transpose(),
          state.psi.row(k).transpose(),    state.y.row(k).transpose(),   state.w_prev.row(k).transpose(),
          state.r_last.row(k).transpose()};
}

NetworkRun start_run(CombinationMatrix combination, std::shared_ptr<const SignalModel> model,
                     AlgorithmSpec algorithm, std::uint64_t seed) {
  if (!model) throw std::invalid_argument("start_run needs a signal model");
  if (model->num_agents() != combination.num_agents())
    throw std::invalid_argument("signal model has K=" + std::to_string(model->num_agents()) +
                                " but the combination matrix has K=" + std::to_string(combination.num_agents()));
  if (algorithm.id == AlgorithmId::ExactDiffusion) require_mu(algorithm.mu);
  const Eigen::MatrixXd r0 = model->sample_all(0);
  NetworkState s;
  s.w = r0;
  s.w_prev = r0;
  s.r_last = r0;
  s.v = r0;
  s.psi = r0;
  s.p = Eigen::MatrixXd::Ones(r0.rows(), r0.cols());
  s.y = Eigen::MatrixXd::Zero(r0.rows(), r0.cols());
  s.frozen.assign(static_cast<std::size_t>(r0.rows()), 0);
  return NetworkRun{std::move(combination), std::move(model), algorithm, seed, 0, std::move(s)};
}

void step_dynamic_consensus(NetworkRun& run) {
  require_full_vector(run);
  const Eigen::MatrixXd r = observe(run, run.iteration + 1);
  const auto& s = run.state;
  Eigen::MatrixXd next = combine(run.combination, s.w) + r - s.r_last;
  finish_full_vector(run, std::move(next), r);
}

void step_dynamic_diffusion(NetworkRun& run, double mu) {
  require_mu(mu);
  require_full_vector(run);
  const Eigen::MatrixXd r = observe(run, run.iteration + 1);
  const auto& s = run.state;
  const Eigen::MatrixXd phi = (1.0 - mu) * s.w + mu * r + s.w - (1.0 - mu) * s.w_prev - mu * s.r_last;
  finish_full_vector(run, combine(run.combination, phi), r);
}

void step_exact_diffusion(NetworkRun& run, double mu) {
  require_mu(mu);
  require_full_vector(run);
  const Eigen::MatrixXd r = observe(run, run.iteration + 1);
  auto& s = run.state;
  Eigen::MatrixXd psi = (1.0 - mu) * s.w + mu * r;
  const Eigen::MatrixXd phi = psi + s.w - s.psi;
  s.psi = std::move(psi);
  finish_full_vector(run, combine(run.combination, phi), r);
}

void step_extra_based(NetworkRun& run) {
  require_full_vector(run);
  const Eigen::MatrixXd r = observe(run, run.iteration + 1);
  const auto& s = run.state;
  Eigen::MatrixXd next =
      combine(run.combination, s.w) + r - s.r_last + 0.5 * (s.w_prev - combine(run.combination, s.w_prev));
  finish_full_vector(run, std::move(next), r);
}

void step_diging_based(NetworkRun& run) {
  require_full_vector(run);
  const Eigen::MatrixXd r = observe(run, run.iteration + 1);
  auto& s = run.state;
  Eigen::MatrixXd next_w = combine(run.combination, s.w - s.y);
  // Frozen rows must hold before the second round reads w_i.
  Eigen::MatrixXd w_i = s.w;
  commit_rows(w_i, next_w, s.frozen);
  Eigen::MatrixXd next_y = combine(run.combination, s.y + w_i - r - s.w + s.r_last);
  commit_rows(s.y, next_y, s.frozen);
  finish_full_vector(run, std::move(w_i), r);
}

void step_sync_coordinate(NetworkRun& run) {
  const auto draw =
      draw_selection(run.seed, run.iteration + 1, run.num_agents(), run.dimension(), SelectionMode::Shared);
  coordinate_iteration(run, draw, false, StaleSource::Memory);
}

void step_indep_coordinate(NetworkRun& run, SelectionMode mode) {
  const auto draw = draw_selection(run.seed, run.iteration + 1, run.num_agents(), run.dimension(), mode);
  coordinate_iteration(run, draw, true, StaleSource::Memory);
}

void step_indep_coordinate_nopush(NetworkRun& run) {
  const auto draw =
      draw_selection(run.seed, run.iteration + 1, run.num_agents(), run.dimension(), SelectionMode::Independent);
  coordinate_iteration(run, draw, false, StaleSource::Memory);
}

void step_sync_coordinate_oracle(NetworkRun& run) {
  const auto draw =
      draw_selection(run.seed, run.iteration + 1, run.num_agents(), run.dimension(), SelectionMode::Shared);
  coordinate_iteration(run, draw, false, StaleSource::TruePrevious);
}

void step(NetworkRun& run) {
  switch (run.algorithm.id) {
    case AlgorithmId::Consensus: return step_dynamic_consensus(run);
    case AlgorithmId::Diffusion: return step_dynamic_diffusion(run, 1.0);
    case AlgorithmId::ExactDiffusion: return step_exact_diffusion(run, run.algorithm.mu);
    case AlgorithmId::Extra: return step_extra_based(run);
    case AlgorithmId::Diging: return step_diging_based(run);
    case AlgorithmId::SyncCoord: return step_sync_coordinate(run);
    case AlgorithmId::IndepCoord: return step_indep_coordinate(run);
    case AlgorithmId::IndepCoordNoPush: return step_indep_coordinate_nopush(run);
  }
}

Eigen::MatrixXd output(const NetworkRun& run) {
  if (run.algorithm.id == AlgorithmId::IndepCoord) return run.state.w.cwiseQuotient(run.state.p);
  return run.state.w;
}

Eigen::MatrixXd effective_matrix(const CombinationMatrix& a, const SelectionDraw& draw, int coord) {
  const int K = a.num_agents();
  if (static_cast<int>(draw.indices.size()) != K) throw std::invalid_argument("draw size differs from K");
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(K, K);
  for (int k = 0; k < K; ++k) {
    if (draw.indices[static_cast<std::size_t>(k)] != coord) m(k, k) = 1.0;
  }
  for (int l = 0; l < K; ++l) {
    if (draw.indices[static_cast<std::size_t>(l)] != coord) continue;
    for (int k = 0; k < K; ++k) m(k, l) += a(l, k);
  }
  return m;
}

std::vector<char> check_stop(const NetworkRun& run, double epsilon) {
  if (run.iteration < 1) throw std::logic_error("check_stop needs at least one step");
  std::vector<char> flags(static_cast<std::size_t>(run.num_agents()));
  for (int k = 0; k < run.num_agents(); ++k)
    flags[static_cast<std::size_t>(k)] = (run.state.w.row(k) - run.state.w_prev.row(k)).norm() <= epsilon;
  return flags;
}

void freeze_agents(NetworkRun& run, const std::vector<char>& flags) {
  if (flags.size() != run.state.frozen.size()) throw std::invalid_argument("flag count differs from K");
  for (std::size_t k = 0; k < flags.size(); ++k)
    if (flags[k]) run.state.frozen[k] = 1;
}

}  // namespace dyntrack
