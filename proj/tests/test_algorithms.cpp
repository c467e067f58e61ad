#include "dyntrack/algorithms.hpp"
#include "dyntrack/errors.hpp"
#include "oracles.hpp"

#include <doctest.h>

#include <cmath>
#include <memory>

using namespace dyntrack;

namespace {

std::shared_ptr<const SignalModel> make_model(int K, int N, std::uint64_t seed, SignalVariant v) {
  return std::make_shared<const SignalModel>(K, N, seed, std::move(v));
}

std::shared_ptr<const SignalModel> static_model(const Eigen::MatrixXd& values) {
  return make_model(static_cast<int>(values.rows()), static_cast<int>(values.cols()), 0, StaticSignal{values});
}

CombinationMatrix geometric(int K, std::uint64_t seed) {
  return metropolis_weights(build_connected_random_geometric(K, 0.45, seed));
}

double max_abs(const Eigen::MatrixXd& m) { return m.cwiseAbs().maxCoeff(); }

}  // namespace

TEST_CASE("algorithm ids") {
  for (const char* id : {"consensus", "diffusion", "extra", "diging", "sync_coord", "indep_coord",
                         "indep_coord_nopush", "exact_diffusion(0.25)"})
    CHECK(to_string(parse_algorithm(id)) == id);
  CHECK(parse_algorithm("exact_diffusion").mu == 1.0);
  CHECK(label(parse_algorithm("exact_diffusion(0.5)")) == "exact_diffusion_0.5");
  CHECK_THROWS_AS(parse_algorithm("gossip"), std::invalid_argument);
  CHECK_THROWS_AS(parse_algorithm("exact_diffusion(0)"), std::invalid_argument);
  CHECK_THROWS_AS(parse_algorithm("exact_diffusion(1.5)"), std::invalid_argument);
  CHECK_THROWS_AS(parse_algorithm("consensus(0.5)"), std::invalid_argument);
  CHECK(scalars_per_iteration(parse_algorithm("consensus"), 7) == 7);
  CHECK(scalars_per_iteration(parse_algorithm("diging"), 7) == 14);
  CHECK(scalars_per_iteration(parse_algorithm("sync_coord"), 7) == 2);
  CHECK(scalars_per_iteration(parse_algorithm("indep_coord"), 7) == 3);
  CHECK(scalars_per_iteration(parse_algorithm("indep_coord_nopush"), 7) == 2);
}

TEST_CASE("selection draws") {
  SUBCASE("shared mode repeats one index") {
    for (Iteration i = 1; i < 100; ++i) {
      const auto d = draw_selection(5, i, 9, 13, SelectionMode::Shared);
      for (int idx : d.indices) CHECK(idx == d.indices[0]);
    }
  }
  SUBCASE("draws are uniform (chi-square, 9 dof, p > 0.001)") {
    std::vector<long> counts(10, 0);
    for (Iteration i = 1; i <= 10000; ++i)
      for (int idx : draw_selection(77, i, 10, 10, SelectionMode::Independent).indices) ++counts[idx];
    CHECK(oracle::chi_square_uniform(counts) < 27.877);
  }
  SUBCASE("an agent's draw does not depend on the network size") {
    const auto small = draw_selection(3, 12, 4, 50, SelectionMode::Independent);
    const auto large = draw_selection(3, 12, 40, 50, SelectionMode::Independent);
    for (int k = 0; k < 4; ++k) CHECK(small.indices[k] == large.indices[k]);
  }
}

TEST_CASE("dynamic consensus") {
  SUBCASE("two agents average in one step") {
    Eigen::MatrixXd r(2, 1);
    r << 1.0, 3.0;
    NetworkRun run = start_run(metropolis_weights(build_complete(2)), static_model(r), {AlgorithmId::Consensus}, 1);
    step(run);
    CHECK(run.iteration == 1);
    CHECK(run.state.w(0, 0) == 2.0);
    CHECK(run.state.w(1, 0) == 2.0);
  }
  SUBCASE("static signal reduces to static consensus") {
    const auto a = geometric(8, 2);
    const auto model = make_model(8, 3, 4, StaticSignal{});
    NetworkRun run = start_run(a, model, {AlgorithmId::Consensus}, 1);
    Eigen::MatrixXd w = model->sample_all(0);
    for (int i = 0; i < 30; ++i) {
      step(run);
      w = a.weights().transpose() * w;
      CHECK(max_abs(run.state.w - w) <= 1e-13);
    }
  }
  SUBCASE("uniform drift is a shifted static run") {
    const auto a = metropolis_weights(build_cycle(5));
    PiecewiseRamp drift;
    drift.slope = 0.003;
    const auto moving = make_model(5, 2, 8, drift);
    const auto still = static_model(moving->sample_all(0));
    NetworkRun m = start_run(a, moving, {AlgorithmId::Consensus}, 1);
    NetworkRun s = start_run(a, still, {AlgorithmId::Consensus}, 1);
    for (Iteration i = 1; i <= 500; ++i) {
      step(m);
      step(s);
      CHECK(max_abs(m.state.w.array() - 0.003 * static_cast<double>(i) - s.state.w.array()) <= 1e-9);
    }
    const Eigen::MatrixXd err = m.state.w.rowwise() - moving->true_average(500).transpose();
    CHECK(max_abs(err) <= 1e-9);
  }
}

TEST_CASE("dynamic diffusion") {
  const auto a = geometric(5, 3);
  const auto model = make_model(5, 3, 10, DecayingSinusoidRamp{});

  SUBCASE("mean of the iterates equals the mean of the signals") {
    NetworkRun run = start_run(a, model, {AlgorithmId::Diffusion}, 1);
    for (Iteration i = 1; i <= 300; ++i) {
      step(run);
      const Eigen::VectorXd gap = run.state.w.colwise().mean().transpose() - model->true_average(i);
      CHECK(gap.cwiseAbs().maxCoeff() <= 1e-12);
    }
  }
  SUBCASE("adapt-correct-combine stepping equals the combined recursion") {
    for (double mu : {1.0, 0.5, 0.1}) {
      NetworkRun combined = start_run(a, model, {AlgorithmId::Diffusion}, 1);
      NetworkRun staged = start_run(a, model, {AlgorithmId::ExactDiffusion, mu}, 1);
      for (int i = 0; i < 100; ++i) {
        step_dynamic_diffusion(combined, mu);
        step(staged);
        CHECK(max_abs(combined.state.w - staged.state.w) <= 1e-12);
      }
    }
  }
  SUBCASE("static signal reduces to classical consensus") {
    const auto still = make_model(5, 3, 6, StaticSignal{});
    NetworkRun run = start_run(a, still, {AlgorithmId::Diffusion}, 1);
    Eigen::MatrixXd w = still->sample_all(0);
    for (int i = 0; i < 40; ++i) {
      step(run);
      w = a.weights().transpose() * w;
      CHECK(max_abs(run.state.w - w) <= 1e-12);
    }
  }
  SUBCASE("contraction per iteration on a static signal") {
    const double lambda = second_eigenvalue_magnitude(a);
    const auto still = make_model(5, 3, 6, StaticSignal{});
    const Eigen::VectorXd truth = still->true_average(0);
    NetworkRun run = start_run(a, still, {AlgorithmId::Diffusion}, 1);
    double prev = (run.state.w.rowwise() - truth.transpose()).norm();
    for (int i = 0; i < 60; ++i) {
      step(run);
      const double now = (run.state.w.rowwise() - truth.transpose()).norm();
      if (prev > 1e-12) CHECK(now <= (lambda + 1e-6) * prev);
      prev = now;
    }
  }
  SUBCASE("mu outside (0, 1] is rejected") {
    NetworkRun run = start_run(a, model, {AlgorithmId::Diffusion}, 1);
    CHECK_THROWS_AS(step_dynamic_diffusion(run, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(step_exact_diffusion(run, 1.2), std::invalid_argument);
    CHECK_THROWS_AS(start_run(a, model, {AlgorithmId::ExactDiffusion, -1.0}, 1), std::invalid_argument);
  }
}

TEST_CASE("EXTRA-based tracker") {
  SUBCASE("extra term vanishes at consensus") {
    const auto a = geometric(6, 1);
    Eigen::MatrixXd r = Eigen::MatrixXd::Constant(6, 2, 0.7);
    NetworkRun extra = start_run(a, static_model(r), {AlgorithmId::Extra}, 1);
    for (int i = 0; i < 5; ++i) step(extra);
    CHECK(max_abs(extra.state.w.array() - 0.7) <= 1e-15);
  }
  SUBCASE("two agents converge on a static signal") {
    Eigen::MatrixXd r(2, 2);
    r << 1.0, -2.0, 5.0, 4.0;
    NetworkRun run = start_run(metropolis_weights(build_complete(2)), static_model(r), {AlgorithmId::Extra}, 1);
    for (int i = 0; i < 200; ++i) step(run);
    CHECK(max_abs(run.state.w.rowwise() - Eigen::RowVector2d(3.0, 1.0)) <= 1e-9);
  }
  SUBCASE("matches consensus when A averages and the old iterate is consensual") {
    const auto J = CombinationMatrix(Eigen::MatrixXd::Constant(4, 4, 0.25));
    const auto model = make_model(4, 3, 2, DecayingSinusoidRamp{});
    NetworkRun extra = start_run(J, model, {AlgorithmId::Extra}, 1);
    NetworkRun cons = start_run(J, model, {AlgorithmId::Consensus}, 1);
    step(extra);
    step(cons);
    // Both now hold w_1; w_0 = r_0 is not consensual, so align w_prev first.
    extra.state.w_prev = Eigen::MatrixXd::Constant(4, 3, 0.3);
    step(extra);
    step(cons);
    CHECK(max_abs(extra.state.w.colwise().mean() - cons.state.w.colwise().mean()) <= 1e-12);
    CHECK(max_abs(extra.state.w - cons.state.w) <= 1e-12);
  }
  SUBCASE("independent per-agent form") {
    const auto a = geometric(5, 7);
    const auto model = make_model(5, 2, 3, DecayingSinusoidRamp{});
    NetworkRun run = start_run(a, model, {AlgorithmId::Extra}, 1);
    Eigen::MatrixXd w = model->sample_all(0), w_old = w, r_old = w;
    for (Iteration i = 1; i <= 40; ++i) {
      const Eigen::MatrixXd r = model->sample_all(i);
      Eigen::MatrixXd next(5, 2);
      for (int k = 0; k < 5; ++k) {
        Eigen::RowVector2d acc = r.row(k) - r_old.row(k) + w_old.row(k);
        for (int l = 0; l < 5; ++l) {
          const double at = a(l, k) + (l == k ? 1.0 : 0.0);
          acc += a(l, k) * w.row(l) - 0.5 * at * w_old.row(l);
        }
        next.row(k) = acc;
      }
      w_old = w;
      w = next;
      r_old = r;
      step(run);
      CHECK(max_abs(run.state.w - w) <= 1e-12);
    }
  }
}

TEST_CASE("DIGing-based tracker") {
  Eigen::MatrixXd r(3, 2);
  r << 1.0, 0.0, 2.0, 6.0, 6.0, 3.0;
  NetworkRun run = start_run(metropolis_weights(build_complete(3)), static_model(r), {AlgorithmId::Diging}, 1);
  CHECK(run.state.y.isZero());
  for (int i = 0; i < 200; ++i) step(run);
  CHECK(max_abs(run.state.w.rowwise() - Eigen::RowVector2d(3.0, 3.0)) <= 1e-9);
  CHECK(max_abs(run.state.y) <= 1e-9);
}

TEST_CASE("shared-coordinate scheme") {
  const auto a = geometric(6, 5);
  SUBCASE("one coordinate reproduces dynamic diffusion bit for bit") {
    const auto model = make_model(6, 1, 2, DecayingSinusoidRamp{});
    NetworkRun coord = start_run(a, model, {AlgorithmId::SyncCoord}, 9);
    NetworkRun diff = start_run(a, model, {AlgorithmId::Diffusion}, 9);
    for (int i = 0; i < 300; ++i) {
      step(coord);
      step(diff);
      REQUIRE(coord.state.w == diff.state.w);
    }
  }
  SUBCASE("agrees with the selection-matrix form") {
    const auto model = make_model(6, 4, 2, DecayingSinusoidRamp{});
    NetworkRun run = start_run(a, model, {AlgorithmId::SyncCoord}, 4);
    oracle::CoordState ref{model->sample_all(0), model->sample_all(0), Eigen::MatrixXd::Ones(6, 4)};
    for (Iteration i = 1; i <= 200; ++i) {
      const auto draw = draw_selection(4, i, 6, 4, SelectionMode::Shared);
      oracle::coordinate_matrix_step(a.weights(), draw.indices, model->sample_all(i), ref, false);
      step(run);
      CHECK(max_abs(run.state.w - ref.w) <= 1e-12);
      CHECK(run.state.v == ref.v);
    }
  }
  SUBCASE("entry means of w and v coincide") {
    const auto model = make_model(6, 5, 2, DecayingSinusoidRamp{});
    NetworkRun run = start_run(a, model, {AlgorithmId::SyncCoord}, 4);
    for (int i = 0; i < 500; ++i) {
      step(run);
      CHECK(max_abs(run.state.w.colwise().mean() - run.state.v.colwise().mean()) <= 1e-12);
    }
  }
  SUBCASE("memory variant and stale-free oracle differ only through staleness") {
    const auto still = make_model(6, 3, 2, StaticSignal{});
    NetworkRun mem = start_run(a, still, {AlgorithmId::SyncCoord}, 4);
    NetworkRun ora = start_run(a, still, {AlgorithmId::SyncCoord}, 4);
    for (int i = 0; i < 100; ++i) {
      step(mem);
      step_sync_coordinate_oracle(ora);
    }
    CHECK(mem.state.w == ora.state.w);

    const auto moving = make_model(6, 3, 2, DecayingSinusoidRamp{});
    NetworkRun mem2 = start_run(a, moving, {AlgorithmId::SyncCoord}, 4);
    NetworkRun ora2 = start_run(a, moving, {AlgorithmId::SyncCoord}, 4);
    for (int i = 0; i < 100; ++i) {
      step(mem2);
      step_sync_coordinate_oracle(ora2);
    }
    CHECK(max_abs(mem2.state.w - ora2.state.w) > 1e-6);
  }
  SUBCASE("untouched entries stay put") {
    const auto model = make_model(6, 4, 2, DecayingSinusoidRamp{});
    NetworkRun run = start_run(a, model, {AlgorithmId::SyncCoord}, 4);
    for (Iteration i = 1; i <= 20; ++i) {
      const Eigen::MatrixXd before = run.state.w;
      const int n = draw_selection(4, i, 6, 4, SelectionMode::Shared).indices[0];
      step(run);
      for (int c = 0; c < 4; ++c)
        if (c != n) CHECK(run.state.w.col(c) == before.col(c));
      CHECK(run.state.v.col(n) == model->sample_all(i).col(n));
    }
  }
}

TEST_CASE("brute-force expectation respects the shared-coordinate rate") {
  for (const Topology& t : {Topology(3, {{0, 1}, {1, 2}}), build_complete(3)}) {
    const auto a = metropolis_weights(t);
    const double lambda = second_eigenvalue_magnitude(a);
    Eigen::MatrixXd r(3, 2);
    r << 1.0, -1.0, 4.0, 2.0, -2.0, 0.5;
    const auto expect = oracle::brute_force_sync_expectation(a.weights(), r, 8);
    const double alpha = 1.0 - (1.0 - lambda) / 2.0;
    for (int i = 0; i <= 8; ++i) CHECK(expect[i] <= std::pow(alpha, i) * expect[0] * (1 + 1e-12));
  }
}

TEST_CASE("push-sum coordinate scheme") {
  const auto a = geometric(7, 8);
  SUBCASE("agrees with the selection-matrix form, p included") {
    const auto model = make_model(7, 4, 2, DecayingSinusoidRamp{});
    NetworkRun run = start_run(a, model, {AlgorithmId::IndepCoord}, 6);
    oracle::CoordState ref{model->sample_all(0), model->sample_all(0), Eigen::MatrixXd::Ones(7, 4)};
    for (Iteration i = 1; i <= 200; ++i) {
      const auto draw = draw_selection(6, i, 7, 4, SelectionMode::Independent);
      oracle::coordinate_matrix_step(a.weights(), draw.indices, model->sample_all(i), ref, true);
      step(run);
      CHECK(max_abs(run.state.w - ref.w) <= 1e-11);
      CHECK(max_abs(run.state.p - ref.p) <= 1e-12);
    }
  }
  SUBCASE("mass conservation") {
    const auto model = make_model(7, 5, 2, DecayingSinusoidRamp{});
    NetworkRun run = start_run(a, model, {AlgorithmId::IndepCoord}, 6);
    for (int i = 0; i < 500; ++i) {
      step(run);
      CHECK(max_abs(run.state.w.colwise().sum() - run.state.v.colwise().sum()) <= 1e-10);
      CHECK(max_abs(run.state.p.colwise().sum().array() - 7.0) <= 1e-10);
      CHECK((run.state.p.array() > 0.0).all());
    }
  }
  SUBCASE("shared draws reduce to the shared-coordinate scheme") {
    const auto model = make_model(7, 5, 2, DecayingSinusoidRamp{});
    NetworkRun push = start_run(a, model, {AlgorithmId::IndepCoord}, 6);
    NetworkRun sync = start_run(a, model, {AlgorithmId::SyncCoord}, 6);
    for (int i = 0; i < 300; ++i) {
      step_indep_coordinate(push, SelectionMode::Shared);
      step(sync);
      CHECK(max_abs(push.state.p.array() - 1.0) <= 1e-12);
      CHECK(max_abs(output(push) - sync.state.w) <= 1e-12);
    }
  }
  SUBCASE("single agent tracks its own signal at the selected entries") {
    const auto model = make_model(1, 3, 2, DecayingSinusoidRamp{});
    NetworkRun run = start_run(CombinationMatrix(Eigen::MatrixXd::Ones(1, 1)), model, {AlgorithmId::IndepCoord}, 5);
    for (Iteration i = 1; i <= 50; ++i) {
      const int n = draw_selection(5, i, 1, 3, SelectionMode::Independent).indices[0];
      step(run);
      CHECK(output(run)(0, n) == doctest::Approx(model->sample(0, i, n)).epsilon(1e-14));
      CHECK(run.state.p(0, n) == 1.0);
    }
  }
  SUBCASE("zero-average signal needs no correction") {
    const auto model = make_model(7, 3, 2, ZeroAverage{});
    NetworkRun run = start_run(a, model, {AlgorithmId::IndepCoordNoPush}, 6);
    for (int i = 0; i < 6000; ++i) step(run);
    CHECK(max_abs(run.state.w) <= 1e-8);
  }
  SUBCASE("weight underflow is an invariant violation") {
    const auto model = make_model(7, 3, 2, StaticSignal{});
    NetworkRun run = start_run(a, model, {AlgorithmId::IndepCoord}, 6);
    run.state.p.setConstant(1e-320);
    CHECK_THROWS_AS(step(run), InvariantError);
  }
}

TEST_CASE("effective matrix") {
  const auto a = geometric(6, 9);
  SUBCASE("all selected gives A^T, none selected gives I") {
    SelectionDraw all{std::vector<int>(6, 2), SelectionMode::Shared};
    CHECK(effective_matrix(a, all, 2) == Eigen::MatrixXd(a.weights().transpose()));
    CHECK(effective_matrix(a, all, 1) == Eigen::MatrixXd::Identity(6, 6));
  }
  SUBCASE("columns are stochastic") {
    for (Iteration i = 1; i <= 100; ++i) {
      const auto draw = draw_selection(3, i, 6, 3, SelectionMode::Independent);
      for (int n = 0; n < 3; ++n) {
        const Eigen::MatrixXd m = effective_matrix(a, draw, n);
        CHECK((m.colwise().sum().array() - 1.0).abs().maxCoeff() <= 1e-12);
        CHECK((m.array() >= 0.0).all());
      }
    }
  }
  SUBCASE("Monte-Carlo mean matches (1 - 1/N) I + A^T / N") {
    const int N = 4;
    const int draws = 100000;
    Eigen::MatrixXd sum = Eigen::MatrixXd::Zero(6, 6), sq = Eigen::MatrixXd::Zero(6, 6);
    for (int i = 1; i <= draws; ++i) {
      const Eigen::MatrixXd m = effective_matrix(a, draw_selection(12, i, 6, N, SelectionMode::Independent), 0);
      sum += m;
      sq += m.cwiseProduct(m);
    }
    const Eigen::MatrixXd mean = sum / draws;
    const Eigen::MatrixXd se = ((sq / draws - mean.cwiseProduct(mean)).cwiseMax(0.0) / draws).cwiseSqrt();
    const Eigen::MatrixXd expected =
        (1.0 - 1.0 / N) * Eigen::MatrixXd::Identity(6, 6) + a.weights().transpose() / N;
    CHECK(((mean - expected).cwiseAbs().array() <= 3.0 * se.array() + 1e-12).all());
  }
}

TEST_CASE("Dobrushin coefficient") {
  CHECK(dobrushin(Eigen::MatrixXd::Constant(4, 4, 0.25)) == doctest::Approx(0.0));
  CHECK(dobrushin(Eigen::MatrixXd::Identity(2, 2)) == 1.0);
  Eigen::Matrix2d m;
  m << 1.0, 0.5, 0.0, 0.5;
  CHECK(dobrushin(m) == doctest::Approx(0.5));
  Eigen::Matrix2d bad;
  bad << 0.5, 0.5, 0.0, 0.0;
  CHECK_THROWS_AS(dobrushin(bad), std::invalid_argument);
  CHECK(dobrushin(Eigen::Matrix2f(Eigen::Matrix2f::Identity())) == 1.0);
}

TEST_CASE("stopping rule") {
  const auto a = geometric(8, 4);
  SUBCASE("static signal after convergence flags everyone") {
    NetworkRun run = start_run(a, make_model(8, 2, 1, StaticSignal{}), {AlgorithmId::Diffusion}, 1);
    CHECK_THROWS_AS(check_stop(run, 1e-6), std::logic_error);
    for (int i = 0; i < 2000; ++i) step(run);
    for (char f : check_stop(run, 1e-10)) CHECK(f);
  }
  SUBCASE("zero epsilon on a moving signal flags nobody") {
    NetworkRun run = start_run(a, make_model(8, 2, 1, DecayingSinusoidRamp{}), {AlgorithmId::Diffusion}, 1);
    for (int i = 0; i < 50; ++i) step(run);
    for (char f : check_stop(run, 0.0)) CHECK_FALSE(f);
  }
  SUBCASE("flags appear at different iterations and frozen rows hold") {
    PiecewiseRamp ramp;
    ramp.slope = 1e-3;
    ramp.spread = 1.0;
    ramp.hold_iteration = 100;
    NetworkRun run = start_run(a, make_model(8, 2, 3, ramp), {AlgorithmId::Diffusion}, 1);
    std::vector<Iteration> first(8, -1);
    std::vector<Eigen::RowVectorXd> frozen_rows(8);
    for (Iteration i = 1; i <= 2000; ++i) {
      step(run);
      for (int k = 0; k < 8; ++k)
        if (first[k] >= 0) CHECK(run.state.w.row(k) == frozen_rows[k]);
      const auto flags = check_stop(run, 1e-5);
      for (int k = 0; k < 8; ++k)
        if (flags[k] && first[k] < 0) {
          first[k] = i;
          frozen_rows[k] = run.state.w.row(k);
        }
      freeze_agents(run, flags);
    }
    std::sort(first.begin(), first.end());
    CHECK(first.front() >= 0);
    CHECK(first.front() != first.back());
  }
}

TEST_CASE("determinism and checkpoints") {
  const auto a = geometric(6, 2);
  const auto model = make_model(6, 5, 3, DecayingSinusoidRamp{});
  for (const char* id : {"consensus", "diffusion", "exact_diffusion(0.3)", "extra", "diging", "sync_coord",
                         "indep_coord", "indep_coord_nopush"}) {
    CAPTURE(id);
    const AlgorithmSpec spec = parse_algorithm(id);
    NetworkRun straight = start_run(a, model, spec, 21);
    NetworkRun twin = start_run(a, model, spec, 21);
    NetworkRun half = start_run(a, model, spec, 21);
    for (int i = 0; i < 60; ++i) {
      step(straight);
      step(twin);
      if (i < 30) step(half);
    }
    CHECK(straight.state.w == twin.state.w);
    // Freeze one agent so the flags travel through the checkpoint too.
    half.state.frozen[0] = 1;
    const std::string text = checkpoint_to_yaml(make_checkpoint(half));
    NetworkRun resumed = resume_run(a, model, checkpoint_from_yaml(text));
    CHECK(resumed.iteration == 30);
    NetworkRun reference = start_run(a, model, spec, 21);
    for (int i = 0; i < 30; ++i) step(reference);
    reference.state.frozen[0] = 1;
    for (int i = 0; i < 30; ++i) {
      step(reference);
      step(resumed);
    }
    CHECK(resumed.state.w == reference.state.w);
    CHECK(resumed.state.p == reference.state.p);
    CHECK(resumed.state.v == reference.state.v);
    CHECK(checkpoint_to_yaml(make_checkpoint(resumed)) == checkpoint_to_yaml(make_checkpoint(reference)));
  }
  CHECK_THROWS_AS(checkpoint_from_yaml("format: 1\n"), std::invalid_argument);
}
