#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include "oracles.hpp"
#include "oukit/rng.hpp"
#include "oukit/simulate.hpp"

using namespace oukit;

TEST_CASE("parameter domain is enforced") {
  CHECK_THROWS_AS(transition_moments({-1.0, 1.0}, 0.0, 1.0), ParameterDomainError);
  CHECK_THROWS_AS(transition_moments({1.0, 0.0}, 0.0, 1.0), ParameterDomainError);
  CHECK_THROWS_AS(transition_moments({1.0, 1.0}, 0.0, -0.5), DegenerateGrid);
  CHECK(OUParams{2.0, 1.0}.stationary_variance() == doctest::Approx(0.25));
}

TEST_CASE("transition moments saturate at the stationary variance") {
  // Strong mean-reversion regime: sigma^2 / 2 theta = 0.25.
  const auto m = transition_moments({2.0, 1.0}, 0.0, 1e3);
  CHECK(std::abs(m.variance - 0.25) < 1e-12);
  CHECK(m.mean == 0.0);
}

TEST_CASE("zero-increment transition is degenerate at the current state") {
  const auto m = transition_moments({0.7, 2.3}, 5.5, 0.0);
  CHECK(m.mean == 5.5);
  CHECK(m.variance == 0.0);
}

TEST_CASE("transition moments match a long-double evaluation") {
  const auto m = transition_moments({0.5, 4.0}, 1.0, 1.0);
  const double mean_ref = static_cast<double>(oracles::ou_mean_factor(0.5L, 1.0L));
  const double var_ref = static_cast<double>(oracles::ou_variance(0.5L, 4.0L, 1.0L));
  CHECK(std::abs(m.mean - mean_ref) < 1e-12);
  CHECK(std::abs(m.variance - var_ref) < 1e-12);
}

TEST_CASE("conditional variance survives tiny theta*dt") {
  // Here 1 - e^{-2 theta dt} underflows to 0 in naive form.
  const double v = conditional_variance(1e-12, 2.0, 1e-4);
  const long double ref = 2.0L * 1e-4L * (1.0L - 1e-12L * 1e-4L);  // sigma^2 dt (1 - theta dt)
  CHECK(v == doctest::Approx(static_cast<double>(ref)).epsilon(1e-10));
  CHECK(v > 0.0);
}

TEST_CASE("conditional variance is increasing in dt and bounded by stationary") {
  SplitMix64 rng(3);
  for (int trial = 0; trial < 50; ++trial) {
    const OUParams params{rng.next_uniform(0.05, 4.0), rng.next_uniform(0.05, 5.0)};
    double prev = 0.0;
    double prev_dt = 0.0;
    for (const double dt : {1e-4, 1e-2, 0.1, 0.5, 1.0, 5.0, 50.0}) {
      const double v = conditional_variance(params.theta, params.sigma_sq, dt);
      CHECK(v >= prev);
      // Strict growth and strict bound hold until e^{-2 theta dt} rounds away.
      if (2.0 * params.theta * prev_dt < 30.0) CHECK(v > prev);
      CHECK(v <= params.stationary_variance());
      if (2.0 * params.theta * dt < 30.0) CHECK(v < params.stationary_variance());
      prev = v;
      prev_dt = dt;
    }
  }
}

TEST_CASE("analytic moments: identity at t = 0 and stationary fixed point") {
  const OUParams params{1.3, 0.7};
  const auto at_zero = analytic_moments(params, 2.0, 0.5, 0.0, 0.0);
  CHECK(at_zero.mean == 2.0);
  CHECK(at_zero.variance == 0.5);

  const double stat = params.stationary_variance();
  for (const double t : {0.1, 1.0, 10.0}) {
    const auto m = analytic_moments(params, 0.0, stat, t, t);
    CHECK(m.variance == doctest::Approx(stat).epsilon(1e-15));
  }
}

TEST_CASE("stationary covariance at zero lag equals sigma^2/2 theta") {
  // Weak mean-reversion regime: 1.0 / (2 * 0.2) = 2.5.
  const auto m = analytic_moments({0.2, 1.0}, 0.0, 2.5, 3.0, 3.0);
  CHECK(m.covariance == doctest::Approx(2.5).epsilon(1e-15));
}

TEST_CASE("log transition density: mode value and normalization") {
  const OUParams params{0.8, 1.7};
  const double dt = 0.3;
  const double x_prev = 1.4;
  const auto m = transition_moments(params, x_prev, dt);

  const double at_mode = transition_log_density(params, x_prev, m.mean, dt);
  CHECK(at_mode ==
        doctest::Approx(-0.5 * std::log(2.0 * std::numbers::pi * m.variance)).epsilon(1e-14));

  const double sd = std::sqrt(m.variance);
  const double mass = oracles::trapezoid(
      [&](double x) { return std::exp(transition_log_density(params, x_prev, x, dt)); },
      m.mean - 10.0 * sd, m.mean + 10.0 * sd, 4000);
  CHECK(std::abs(mass - 1.0) < 1e-6);

  CHECK_THROWS_AS(transition_log_density(params, 0.0, 0.0, 0.0), DegenerateGrid);
  CHECK_THROWS_AS(transition_log_density(params, 0.0, 0.0, -1.0), DegenerateGrid);
}

TEST_CASE("long-horizon transition density collapses to the stationary law") {
  const OUParams params{2.0, 1.0};
  for (const double x : {-1.5, -0.2, 0.0, 0.4, 2.0}) {
    const double lhs = transition_log_density(params, 3.0, x, 1e3);
    const double rhs =
        static_cast<double>(oracles::gaussian_log_pdf(x, 0.0L, 0.25L));
    CHECK(lhs == doctest::Approx(rhs).epsilon(1e-12));
  }
}

TEST_CASE("two-step density equals the one-step convolution (Markov consistency)") {
  const OUParams params{1.1, 0.9};
  const double dt = 0.25;
  const double x0 = 0.8;
  const auto one = transition_moments(params, x0, dt);
  const double sd = std::sqrt(one.variance);

  for (const double x2 : {-0.5, 0.3, 1.1}) {
    const double direct = std::exp(transition_log_density(params, x0, x2, 2.0 * dt));
    const double convolved = oracles::trapezoid(
        [&](double mid) {
          return std::exp(transition_log_density(params, x0, mid, dt) +
                          transition_log_density(params, mid, x2, dt));
        },
        one.mean - 12.0 * sd, one.mean + 12.0 * sd, 6000);
    CHECK(std::abs(direct - convolved) < 1e-4);
  }
}

TEST_CASE("simulate_exact is deterministic and shape-correct") {
  const OUParams params{2.0, 1.0};
  const GridSpec grid{0.01, 500};
  SimConfig sim;
  sim.seed = 99;
  const Trajectory a = simulate_exact(params, grid, sim);
  const Trajectory b = simulate_exact(params, grid, sim);
  CHECK(a.x.size() == 501);
  CHECK(a.x == b.x);

  sim.seed = 100;
  const Trajectory c = simulate_exact(params, grid, sim);
  CHECK(a.x != c.x);

  CHECK_THROWS_AS(simulate_exact(params, GridSpec{0.01, 0}, sim), DegenerateGrid);
}

TEST_CASE("initial-value modes follow their law") {
  const OUParams params{0.5, 4.0};
  const GridSpec grid{0.1, 1};

  SimConfig fixed;
  fixed.init_mode = InitMode::fixed;
  fixed.x0 = -3.25;
  fixed.seed = 5;
  CHECK(simulate_exact(params, grid, fixed).x[0] == -3.25);

  SimConfig uniform;
  uniform.init_mode = InitMode::uniform_k_sigma;
  uniform.k = 30.0;
  const double half_width = 30.0 * 2.0;  // k sigma
  double min_seen = 0.0, max_seen = 0.0;
  for (int i = 0; i < 4000; ++i) {
    uniform.seed = derive_seed(11, 0, static_cast<std::uint64_t>(i));
    const double x0 = simulate_exact(params, grid, uniform).x[0];
    CHECK(std::abs(x0) <= half_width);
    min_seen = std::min(min_seen, x0);
    max_seen = std::max(max_seen, x0);
  }
  CHECK(min_seen < -0.9 * half_width);
  CHECK(max_seen > 0.9 * half_width);

  SimConfig stationary;
  stationary.init_mode = InitMode::stationary;
  double sum = 0.0, sum_sq = 0.0;
  const int n = 20000;
  for (int i = 0; i < n; ++i) {
    stationary.seed = derive_seed(12, 0, static_cast<std::uint64_t>(i));
    const double x0 = simulate_exact(params, grid, stationary).x[0];
    sum += x0;
    sum_sq += x0 * x0;
  }
  const double stat = params.stationary_variance();
  CHECK(std::abs(sum / n) < 4.0 * std::sqrt(stat / n));
  CHECK(std::abs(sum_sq / n - stat) < 4.0 * stat * std::sqrt(2.0 / n));
}

TEST_CASE("long stationary paths reproduce sigma^2/2 theta in every regime") {
  const std::vector<OUParams> regimes = {{2.0, 1.0}, {0.2, 1.0}, {0.5, 4.0}, {0.5, 0.25}};
  for (const auto& params : regimes) {
    const GridSpec grid{0.05, 1000000};
    SimConfig sim;
    sim.init_mode = InitMode::stationary;
    sim.seed = 2024;
    const Trajectory path = simulate_exact(params, grid, sim);
    const double mean = path.x.mean();
    const double var = (path.x.array() - mean).square().mean();
    const double stat = params.stationary_variance();
    CHECK(std::abs(var - stat) < 0.05 * stat);
  }
}

TEST_CASE("lag-1 sample autocorrelation matches e^{-theta dt}") {
  const OUParams params{1.0, 1.0};
  const GridSpec grid{0.1, 100000};
  SimConfig sim;
  sim.init_mode = InitMode::stationary;
  sim.seed = 31;
  const Trajectory path = simulate_exact(params, grid, sim);

  const Eigen::Index n = grid.n_steps;
  const auto u = path.x.head(n).array();
  const auto v = path.x.tail(n).array();
  const double mu_u = u.mean(), mu_v = v.mean();
  const double corr = ((u - mu_u) * (v - mu_v)).sum() /
                      std::sqrt((u - mu_u).square().sum() * (v - mu_v).square().sum());
  const double expected = std::exp(-0.1);
  CHECK(std::abs(corr - expected) < 0.02 * expected);
}

TEST_CASE("single-step law matches the transition moments within 4 SE") {
  const OUParams params{0.2, 1.0};
  const double dt = 0.1;
  const double x_prev = 1.0;
  const auto m = transition_moments(params, x_prev, dt);

  const int n = 100000;
  SimConfig sim;
  sim.init_mode = InitMode::fixed;
  sim.x0 = x_prev;
  double sum = 0.0, sum_sq = 0.0;
  for (int i = 0; i < n; ++i) {
    sim.seed = derive_seed(77, 1, static_cast<std::uint64_t>(i));
    const double x1 = simulate_exact(params, GridSpec{dt, 1}, sim).x[1];
    sum += x1;
    sum_sq += x1 * x1;
  }
  const double mean = sum / n;
  const double var = sum_sq / n - mean * mean;
  CHECK(std::abs(mean - m.mean) < 4.0 * std::sqrt(m.variance / n));
  CHECK(std::abs(var - m.variance) < 4.0 * m.variance * std::sqrt(2.0 / n));
}

TEST_CASE("simulate_batch labels, counts, and composes simulate_exact") {
  const GridSpec grid{0.05, 20};
  SimConfig sim;
  sim.seed = 4242;
  const std::vector<OUParams> combos = {{2.0, 1.0}, {0.5, 4.0}};

  const auto batch = simulate_batch(combos, grid, sim, 3, 2);
  REQUIRE(batch.size() == 6);
  for (std::size_t i = 0; i < batch.size(); ++i) {
    const auto& expected = combos[i / 3];
    CHECK(batch[i].params.theta == expected.theta);
    CHECK(batch[i].params.sigma_sq == expected.sigma_sq);
  }

  // A single-count batch is exactly simulate_exact under the derived seed.
  const auto single = simulate_batch({combos[0]}, grid, sim, 1);
  SimConfig derived = sim;
  derived.seed = trajectory_seed(sim.seed, combos[0], 0);
  CHECK(single[0].trajectory.x == simulate_exact(combos[0], grid, derived).x);

  CHECK_THROWS_AS(simulate_batch(combos, grid, sim, 0), EmptyInput);
}

TEST_CASE("batch regeneration is order-independent up to relabeling") {
  const GridSpec grid{0.02, 50};
  SimConfig sim;
  sim.seed = 909;
  const std::vector<OUParams> forward = {{2.0, 1.0}, {0.2, 1.0}};
  const std::vector<OUParams> reversed = {{0.2, 1.0}, {2.0, 1.0}};

  const auto digest = [](const std::vector<LabeledTrajectory>& batch) {
    std::vector<double> sums;
    sums.reserve(batch.size());
    for (const auto& item : batch) sums.push_back(item.trajectory.x.sum());
    std::sort(sums.begin(), sums.end());
    return sums;
  };

  CHECK(digest(simulate_batch(forward, grid, sim, 5)) ==
        digest(simulate_batch(reversed, grid, sim, 5)));
}

TEST_CASE("thread count does not change batch results") {
  const GridSpec grid{0.02, 40};
  SimConfig sim;
  sim.seed = 5150;
  const std::vector<OUParams> combos = {{2.0, 1.0}, {0.5, 0.25}};
  const auto serial = simulate_batch(combos, grid, sim, 8, 1);
  const auto threaded = simulate_batch(combos, grid, sim, 8, 4);
  REQUIRE(serial.size() == threaded.size());
  for (std::size_t i = 0; i < serial.size(); ++i) {
    CHECK(serial[i].trajectory.x == threaded[i].trajectory.x);
  }
}
