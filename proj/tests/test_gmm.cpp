#include <doctest.h>

#include <cmath>
#include <vector>

#include "oracles.hpp"
#include "oukit/gmm.hpp"
#include "oukit/rng.hpp"
#include "oukit/simulate.hpp"

using namespace oukit;

namespace {

Trajectory make_trajectory(const std::vector<double>& values, double dt) {
  Trajectory t;
  t.x = Eigen::Map<const Eigen::VectorXd>(values.data(),
                                          static_cast<Eigen::Index>(values.size()));
  t.grid = GridSpec{dt, static_cast<int>(values.size()) - 1};
  return t;
}

}  // namespace

TEST_CASE("a linear ramp pins the correlation clamp and the theta floor") {
  std::vector<double> ramp(50);
  for (std::size_t i = 0; i < ramp.size(); ++i) ramp[i] = static_cast<double>(i + 1);
  const Trajectory t = make_trajectory(ramp, 0.01);

  const GmmEstimate est = gmm_initialize(t);
  // Lag-1 correlation of a ramp is exactly 1 -> clamped to 0.999, and
  // -log(0.999)/0.01 ~= 0.1 sits below the 0.5 floor.
  CHECK(est.rho_hat == 0.999);
  CHECK(est.rho_clamped);
  CHECK(est.theta_hat == 0.5);
  CHECK(est.theta_floored);

  const double mean = t.x.mean();
  const double var = (t.x.array() - mean).square().mean();
  CHECK(est.sigma_sq_hat == doctest::Approx(2.0 * 0.5 * var).epsilon(1e-14));
}

TEST_CASE("an alternating series pins the lower correlation clamp") {
  std::vector<double> zigzag(60);
  for (std::size_t i = 0; i < zigzag.size(); ++i) zigzag[i] = i % 2 == 0 ? 1.0 : -1.0;
  const GmmEstimate est = gmm_initialize(make_trajectory(zigzag, 0.1));
  CHECK(est.rho_hat == 1e-4);
  CHECK(est.rho_clamped);
  CHECK_FALSE(est.theta_floored);  // -log(1e-4)/0.1 ~= 92
  CHECK(est.theta_hat == doctest::Approx(-std::log(1e-4) / 0.1).epsilon(1e-14));
}

TEST_CASE("series engineered to lag-1 correlation e^{-0.1} gives theta_hat 1") {
  // Start from a decaying pattern, then bisect the free last element until the
  // oracle correlation equals the target. The assertion exercises lines 4-5 of
  // the initializer: theta = max(-log(rho)/dt, 0.5) = 1, sigma_sq = 2 Var(X).
  const double target = std::exp(-0.1);
  std::vector<double> x = {2.0, 1.7, 1.5, 1.3, 1.15, 1.0, 0.85, 0.7, 0.6, 0.5,
                           0.42, 0.35, 0.3, 0.24, 0.2, 0.16, 0.13, 0.1, 0.08, 0.0};
  const auto corr_with_last = [&](double last) {
    std::vector<double> probe = x;
    probe.back() = last;
    return oracles::naive_gmm(probe, 0.1).rho_hat;
  };

  // The correlation peaks near the natural continuation and falls off on both
  // sides; scan for a bracketing pair, then bisect inside it.
  double lo = 0.0, hi = 0.0;
  bool bracketed = false;
  double prev_at = -10.0, prev_corr = corr_with_last(prev_at);
  for (double at = -9.9; at <= 10.0 && !bracketed; at += 0.1) {
    const double corr = corr_with_last(at);
    if ((prev_corr - target) * (corr - target) <= 0.0) {
      lo = prev_at;
      hi = at;
      bracketed = true;
    }
    prev_at = at;
    prev_corr = corr;
  }
  REQUIRE(bracketed);
  const bool rising = corr_with_last(lo) < corr_with_last(hi);
  for (int iter = 0; iter < 200; ++iter) {
    const double mid = 0.5 * (lo + hi);
    const bool below = corr_with_last(mid) < target;
    (below == rising ? lo : hi) = mid;
  }
  x.back() = 0.5 * (lo + hi);

  const GmmEstimate est = gmm_initialize(make_trajectory(x, 0.1));
  CHECK(est.rho_hat == doctest::Approx(target).epsilon(1e-12));
  CHECK_FALSE(est.rho_clamped);
  CHECK_FALSE(est.theta_floored);
  CHECK(est.theta_hat == doctest::Approx(1.0).epsilon(1e-10));

  long double mean = 0.0L, var = 0.0L;
  for (const double v : x) mean += v;
  mean /= x.size();
  for (const double v : x) var += (v - mean) * (v - mean);
  var /= x.size();
  CHECK(est.sigma_sq_hat ==
        doctest::Approx(2.0 * est.theta_hat * static_cast<double>(var)).epsilon(1e-10));
}

TEST_CASE("degenerate series are rejected") {
  CHECK_THROWS_AS(gmm_initialize(make_trajectory({1.0, 1.0, 1.0, 1.0}, 0.1)), ConstantSeries);
  CHECK_THROWS_AS(gmm_initialize(make_trajectory({1.0, 2.0}, 0.1)), TooShort);
  // Non-constant series whose lagged slice is constant.
  CHECK_THROWS_AS(gmm_initialize(make_trajectory({1.0, 2.0, 2.0, 2.0, 2.0}, 0.1)),
                  ConstantSeries);
}

TEST_CASE("initializer equals the direct transcription on 100 random paths") {
  SplitMix64 rng(314);
  int clamps_seen = 0, floors_seen = 0;
  for (int trial = 0; trial < 100; ++trial) {
    Trajectory t;
    const double dt = rng.next_uniform(0.005, 0.2);
    const int n = 20 + static_cast<int>(rng.next_uniform(0.0, 200.0));
    t.grid = GridSpec{dt, n};
    t.x.resize(n + 1);

    // Mix of regimes: smooth near-unit-correlation walks, OU-like paths, and
    // white noise that lands below the lower clamp.
    const int kind = trial % 3;
    if (kind == 0) {
      t.x[0] = rng.next_uniform(-1.0, 1.0);
      for (int i = 1; i <= n; ++i) t.x[i] = t.x[i - 1] + 1e-3 * rng.next_normal();
    } else if (kind == 1) {
      const OUParams params{rng.next_uniform(0.2, 3.0), rng.next_uniform(0.2, 3.0)};
      SimConfig sim;
      sim.seed = derive_seed(1000, 0, static_cast<std::uint64_t>(trial));
      sim.init_mode = InitMode::stationary;
      t = simulate_exact(params, t.grid, sim);
    } else {
      for (int i = 0; i <= n; ++i) t.x[i] = rng.next_normal();
    }

    const GmmEstimate est = gmm_initialize(t);
    const std::vector<double> flat(t.x.data(), t.x.data() + t.x.size());
    const oracles::NaiveGmm ref = oracles::naive_gmm(flat, t.grid.dt);
    CHECK(std::abs(est.theta_hat - ref.theta_hat) <
          1e-10 * std::max(1.0, std::abs(ref.theta_hat)));
    CHECK(std::abs(est.sigma_sq_hat - ref.sigma_sq_hat) <
          1e-10 * std::max(1.0, std::abs(ref.sigma_sq_hat)));
    CHECK(std::abs(est.rho_hat - ref.rho_hat) < 1e-10);
    clamps_seen += est.rho_clamped ? 1 : 0;
    floors_seen += est.theta_floored ? 1 : 0;
  }
  // Both clamp branches must actually be exercised.
  CHECK(clamps_seen > 0);
  CHECK(floors_seen > 0);
}
