#include <doctest.h>

#include <Eigen/Dense>

#include "satnn/diffusion.hpp"
#include "satnn/generate.hpp"

using namespace satnn;

namespace {

GnnModel<float> denoiser_model(uint64_t seed = 7) {
  ModelConfig cfg;
  cfg.d_model = 8;
  cfg.t_train = 4;
  cfg.value_embedding = true;
  return GnnModel<float>(cfg, seed);
}

// Brute-force Bayes over the two-state chain: cumulative matrices by explicit
// products, denominators by explicit marginalization.
Eigen::Vector2d brute_posterior(int x_t, const Eigen::Vector2d& p0, int t,
                                const NoiseSchedule& sched) {
  auto q_at = [&](int step) {
    Eigen::Matrix2d q;
    double b = sched.beta(step - 1);
    q << 1 - b, b, b, 1 - b;
    return q;
  };
  Eigen::Matrix2d cum_prev = Eigen::Matrix2d::Identity();
  for (int s = 1; s <= t - 1; ++s) cum_prev = cum_prev * q_at(s);
  Eigen::Matrix2d q_t = q_at(t);
  Eigen::Matrix2d cum_t = cum_prev * q_t;

  Eigen::Vector2d out = Eigen::Vector2d::Zero();
  for (int k = 0; k < 2; ++k) {
    double denom = 0.0;  // p(x_t | x0 = k), marginalized explicitly
    for (int j = 0; j < 2; ++j) denom += cum_prev(k, j) * q_t(j, x_t);
    for (int j = 0; j < 2; ++j) out(j) += p0(k) * cum_prev(k, j) * q_t(j, x_t) / denom;
  }
  return out / out.sum();
}

}  // namespace

TEST_CASE("schedule closed form matches explicit matrix products") {
  NoiseSchedule s = build_schedule(6, 0.05, 0.3);
  CHECK(s.cum_flip(1) == doctest::Approx(s.beta(0)));  // Q-bar_1 = Q_1
  Eigen::Matrix2d prod = Eigen::Matrix2d::Identity();
  for (int t = 1; t <= 6; ++t) {
    Eigen::Matrix2d q;
    q << 1 - s.beta(t - 1), s.beta(t - 1), s.beta(t - 1), 1 - s.beta(t - 1);
    prod = prod * q;
    CHECK(prod(0, 1) == doctest::Approx(s.cum_flip(t)).epsilon(1e-12));
    CHECK(prod(0, 0) + prod(0, 1) == doctest::Approx(1.0));  // row stochastic
    CHECK(prod(0, 1) == doctest::Approx(prod(1, 0)));        // symmetric
  }
}

TEST_CASE("schedule preconditions") {
  CHECK_THROWS_AS(build_schedule(10, 0.0, 0.3), std::invalid_argument);
  CHECK_THROWS_AS(build_schedule(10, 0.1, 0.5), std::invalid_argument);
  CHECK_THROWS_AS(build_schedule(10, 0.4, 0.2), std::invalid_argument);
  CHECK_THROWS_AS(build_schedule(0, 0.1, 0.2), std::invalid_argument);
}

TEST_CASE("default training schedule ends within TV 0.01 of uniform") {
  NoiseSchedule s = build_schedule(50, 0.02, 0.35);
  CHECK(std::abs(0.5 - s.cum_flip(50)) < 0.01);
}

TEST_CASE("forward corruption: reproducible, stationary at t=T, faithful at small t") {
  NoiseSchedule s = build_schedule(50, 0.02, 0.35);
  Assignment x0(10000, 0);
  Rng rng_a(3), rng_b(3);
  Assignment a = forward_corrupt(x0, 30, s, rng_a);
  Assignment b = forward_corrupt(x0, 30, s, rng_b);
  CHECK(a == b);

  Rng rng_c(5);
  Assignment at_T = forward_corrupt(x0, 50, s, rng_c);
  double flip_rate =
      std::count(at_T.begin(), at_T.end(), 1) / static_cast<double>(at_T.size());
  CHECK(std::abs(flip_rate - 0.5) < 0.02);

  NoiseSchedule gentle = build_schedule(50, 1e-4, 0.35);
  Rng rng_d(7);
  Assignment near = forward_corrupt(Assignment(200, 1), 1, gentle, rng_d);
  CHECK(std::count(near.begin(), near.end(), 1) >= 195);
}

TEST_CASE("posterior matches brute-force Bayes at n=1 for every t of a T=4 schedule") {
  NoiseSchedule s = build_schedule(4, 0.05, 0.3);
  Rng rng(17);
  for (int t = 1; t <= 4; ++t) {
    for (int xt = 0; xt < 2; ++xt) {
      for (int trial = 0; trial < 20; ++trial) {
        double p = rng.uniform(0.01, 0.99);
        Eigen::MatrixXd p0(1, 2);
        p0 << 1 - p, p;
        Eigen::MatrixXd got =
            posterior_probs({static_cast<uint8_t>(xt)}, p0, t, s);
        Eigen::Vector2d want = brute_posterior(xt, {1 - p, p}, t, s);
        CHECK(std::abs(got(0, 0) - want(0)) < 1e-9);
        CHECK(std::abs(got(0, 1) - want(1)) < 1e-9);
        CHECK(got(0, 0) + got(0, 1) == doctest::Approx(1.0).epsilon(1e-9));
      }
    }
  }
}

TEST_CASE("one-hot prediction with near-zero noise pins the previous state") {
  NoiseSchedule s = build_schedule(4, 1e-4, 1e-3);
  Eigen::MatrixXd p0(1, 2);
  p0 << 0, 1;  // x0 = 1 predicted with certainty
  for (int t = 2; t <= 4; ++t) {
    Eigen::MatrixXd q = posterior_probs({1}, p0, t, s);
    CHECK(q(0, 1) > 0.99);
  }
  Rng rng(3);
  Assignment step = posterior_step({1}, p0, 3, s, rng, /*deterministic=*/true);
  CHECK(step[0] == 1);
}

TEST_CASE("diffusion solve on trivial and random formulas keeps its contract") {
  GnnModel<float> model = denoiser_model();
  DiffusionRun run;
  run.gnn_steps = 3;
  run.diffusion_steps = 4;

  CnfFormula taut;
  taut.num_vars = 1;
  taut.clauses = {{{0, true}, {0, false}}};
  SolveResult r = diffusion_solve(taut, model, run, 5);
  CHECK(r.status == SolveStatus::SatFound);
  CHECK(r.best_gap == 0);
  CHECK(r.steps_used == 1);

  Rng rng(9);
  for (int round = 0; round < 10; ++round) {
    CnfFormula f = gen_random_ksat(6, 18, 3, rng);
    SolveResult rr = diffusion_solve(f, model, run, 100 + round);
    CHECK((rr.status == SolveStatus::SatFound) == (rr.best_gap == 0));
    if (rr.status == SolveStatus::SatFound)
      CHECK(evaluate(f, rr.assignment).gap == 0);
    CHECK(static_cast<int>(rr.gap_trajectory.size()) <= run.diffusion_steps);
  }
}

TEST_CASE("single diffusion step reduces to one denoiser call plus decode") {
  GnnModel<float> model = denoiser_model(21);
  DiffusionRun run;
  run.gnn_steps = 4;
  run.diffusion_steps = 1;
  Rng rng(31);
  for (int round = 0; round < 5; ++round) {
    CnfFormula f = gen_random_ksat(5, 15, 3, rng);
    SolveResult a = diffusion_solve(f, model, run, 40 + round);
    SolveResult b = periodic_rounding_solve(f, model, 4, 1, 40 + round);
    CHECK(a.best_gap == b.best_gap);
    CHECK(a.assignment == b.assignment);
  }
}

TEST_CASE("deterministic rounding equals periodic re-embedding inference") {
  GnnModel<float> model = denoiser_model(33);
  DiffusionRun run;
  run.gnn_steps = 4;
  run.diffusion_steps = 5;
  run.deterministic = true;
  Rng rng(41);
  for (int round = 0; round < 15; ++round) {
    CnfFormula f = gen_random_ksat(6, 20, 3, rng);
    SolveResult a = diffusion_solve(f, model, run, 200 + round);
    SolveResult b = periodic_rounding_solve(f, model, 4, 5, 200 + round);
    CHECK(a.gap_trajectory == b.gap_trajectory);  // exact trajectory equality
    CHECK(a.assignment == b.assignment);
    CHECK(a.best_gap == b.best_gap);
  }
}

TEST_CASE("run configuration validation") {
  DiffusionRun run;
  CHECK(run.thresholds == std::vector<double>{0.6, 0.75, 0.9});
  CHECK_NOTHROW(run.check());
  run.thresholds = {0.9, 0.6};
  CHECK_THROWS_AS(run.check(), std::invalid_argument);
  run.thresholds = {0.4};
  CHECK_THROWS_AS(run.check(), std::invalid_argument);
  run.thresholds = {0.6};
  run.gnn_steps = 0;
  CHECK_THROWS_AS(run.check(), std::invalid_argument);
}

TEST_CASE("up-guided search solves a propagation-complete formula in one call") {
  // (x1) ^ (~x1 v x2): any partial assignment propagates to the full solution;
  // even an empty partial triggers the unit chain
  CnfFormula f;
  f.num_vars = 2;
  f.clauses = {{{0, true}}, {{0, false}, {1, true}}};
  GnnModel<float> model = denoiser_model(51);
  DiffusionRun run;
  run.gnn_steps = 3;
  run.diffusion_steps = 4;
  UpSolveResult r = up_guided_solve(f, model, run, 9);
  CHECK(r.result.status == SolveStatus::SatFound);
  CHECK(r.recursive_calls == 1);
  CHECK(evaluate(f, r.result.assignment).gap == 0);
}

TEST_CASE("up-guided search returns verified assignments and bounded call counts") {
  GnnModel<float> model = denoiser_model(61);
  DiffusionRun run;
  run.gnn_steps = 3;
  run.diffusion_steps = 5;
  Rng rng(71);
  for (int round = 0; round < 10; ++round) {
    CnfFormula f = gen_random_ksat(7, 24, 3, rng);
    UpSolveResult r = up_guided_solve(f, model, run, 300 + round);
    if (r.result.status == SolveStatus::SatFound)
      CHECK(evaluate(f, r.result.assignment).gap == 0);
    CHECK(r.recursive_calls >= 1);
    CHECK(r.result.best_gap <= f.num_clauses());
  }
}
