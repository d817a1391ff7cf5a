#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "oukit/gmm.hpp"
#include "oukit/mle.hpp"
#include "oukit/rng.hpp"
#include "oukit/simulate.hpp"

using namespace oukit;

namespace {

Trajectory strong_regime_path(std::uint64_t seed) {
  SimConfig sim;
  sim.seed = seed;
  sim.k = 30.0;
  return simulate_exact({2.0, 1.0}, GridSpec{0.01, 500}, sim);
}

}  // namespace

TEST_CASE("strong-regime fit recovers sigma_sq within 4 asymptotic SEs") {
  const Trajectory t = strong_regime_path(2025);
  const EstimationResult fit = fit_mle(t);
  // sqrt(2 sigma^4 / n) with sigma^2 = 1, n = 500.
  const double band = 4.0 * std::sqrt(2.0 / 500.0);
  CHECK(std::abs(fit.params_hat.sigma_sq - 1.0) < band);
  CHECK(fit.params_hat.theta > 0.0);
  CHECK(fit.converged);
  CHECK(fit.wall_time_s >= 0.0);
}

TEST_CASE("a huge tolerance makes stage II return the GMM start verbatim") {
  const Trajectory t = strong_regime_path(77);
  const GmmEstimate start = gmm_initialize(t);

  MleConfig config;
  config.grad_tolerance = 1e12;  // ||grad|| < eps at the start -> immediate exit
  config.basin_hops = 0;
  const EstimationResult fit = fit_mle(t, config);
  CHECK(fit.iterations == 0);
  CHECK(fit.stage_reached == MleStage::bfgs);
  CHECK(fit.params_hat.theta == doctest::Approx(start.theta_hat).epsilon(1e-12));
  CHECK(fit.params_hat.sigma_sq == doctest::Approx(start.sigma_sq_hat).epsilon(1e-12));
}

TEST_CASE("fit never reports a likelihood below the GMM start") {
  for (std::uint64_t seed : {1ULL, 2ULL, 3ULL, 4ULL, 5ULL}) {
    const Trajectory t = strong_regime_path(seed);
    const GmmEstimate start = gmm_initialize(t);
    const double f_start = log_likelihood({start.theta_hat, start.sigma_sq_hat}, t);
    const EstimationResult fit = fit_mle(t);
    CHECK(fit.log_likelihood >= f_start);
    CHECK(fit.log_likelihood == doctest::Approx(log_likelihood(fit.params_hat, t)));
  }
}

TEST_CASE("rescaling the path maps sigma_sq by c^2 and leaves theta fixed") {
  const Trajectory t = strong_regime_path(31337);
  MleConfig config;
  config.grad_tolerance = 1e-9;
  const EstimationResult base = fit_mle(t, config);

  const double c = 3.0;
  Trajectory scaled = t;
  scaled.x *= c;
  const EstimationResult mapped = fit_mle(scaled, config);

  CHECK(std::abs(mapped.params_hat.theta - base.params_hat.theta) <
        1e-4 * std::max(1.0, base.params_hat.theta));
  CHECK(std::abs(mapped.params_hat.sigma_sq - c * c * base.params_hat.sigma_sq) <
        1e-4 * std::max(1.0, c * c * base.params_hat.sigma_sq));
}

TEST_CASE("sigma_sq RMSE shrinks as the path grows") {
  const OUParams truth{2.0, 1.0};
  const int n_paths = 100;
  std::vector<double> rmse;
  for (const int n_steps : {500, 5000, 50000}) {
    double mse = 0.0;
    for (int i = 0; i < n_paths; ++i) {
      SimConfig sim;
      sim.seed = derive_seed(888, static_cast<std::uint64_t>(n_steps),
                             static_cast<std::uint64_t>(i));
      sim.k = 30.0;
      const Trajectory t = simulate_exact(truth, GridSpec{0.01, n_steps}, sim);
      const EstimationResult fit = fit_mle(t);
      mse += (fit.params_hat.sigma_sq - truth.sigma_sq) *
             (fit.params_hat.sigma_sq - truth.sigma_sq);
    }
    rmse.push_back(std::sqrt(mse / n_paths));
  }
  CHECK(rmse[1] < rmse[0]);
  CHECK(rmse[2] < rmse[1]);
}

TEST_CASE("weak-regime batch median lands near the true theta") {
  const OUParams truth{0.2, 1.0};
  std::vector<double> thetas;
  for (int i = 0; i < 500; ++i) {
    SimConfig sim;
    sim.seed = derive_seed(4321, 0, static_cast<std::uint64_t>(i));
    sim.k = 30.0;
    const Trajectory t = simulate_exact(truth, GridSpec{0.01, 500}, sim);
    thetas.push_back(fit_mle(t).params_hat.theta);
  }
  std::sort(thetas.begin(), thetas.end());
  const double median = 0.5 * (thetas[249] + thetas[250]);
  CHECK(std::abs(median - 0.2) < 0.15);
}

TEST_CASE("constant-series fallback behavior") {
  Trajectory flat;
  flat.grid = GridSpec{0.1, 4};
  flat.x.resize(5);
  flat.x << 1.0, 1.0, 1.0, 1.0, 1.0;
  CHECK_THROWS_AS(fit_mle(flat), ConstantSeries);

  // Correlation undefined (constant lagged slice) but Var(X) > 0: the fixed
  // fallback start (0.5, Var) applies and the fit proceeds.
  Trajectory step;
  step.grid = GridSpec{0.1, 5};
  step.x.resize(6);
  step.x << 1.0, 2.0, 2.0, 2.0, 2.0, 2.0;
  const EstimationResult fit = fit_mle(step);
  CHECK(std::isfinite(fit.log_likelihood));
  CHECK(fit.params_hat.theta > 0.0);
  CHECK(fit.params_hat.sigma_sq > 0.0);
}

TEST_CASE("basin-hopping trigger modes") {
  const Trajectory t = strong_regime_path(11);
  MleConfig always;
  always.trigger = BasinHopTrigger::always;
  always.basin_hops = 5;
  CHECK(fit_mle(t, always).stage_reached == MleStage::basinhop);

  MleConfig never;
  never.trigger = BasinHopTrigger::never;
  CHECK(fit_mle(t, never).stage_reached == MleStage::bfgs);

  MleConfig disabled;
  disabled.trigger = BasinHopTrigger::always;
  disabled.basin_hops = 0;
  CHECK(fit_mle(t, disabled).stage_reached == MleStage::bfgs);
}

TEST_CASE("fit is a pure function of its inputs") {
  const Trajectory t = strong_regime_path(5005);
  const EstimationResult a = fit_mle(t);
  const EstimationResult b = fit_mle(t);
  CHECK(a.params_hat.theta == b.params_hat.theta);
  CHECK(a.params_hat.sigma_sq == b.params_hat.sigma_sq);
  CHECK(a.log_likelihood == b.log_likelihood);
  CHECK(a.iterations == b.iterations);
}
