#pragma once

#include <Eigen/Core>

#include <cmath>
#include <cstdint>

#include "oukit/errors.hpp"

namespace oukit {

/// Parameter vector of the process dX_t = -theta X_t dt + sigma dW_t.
/// theta is the mean-reversion rate (1/time), sigma_sq the instantaneous
/// variance rate (state^2/time); both strictly positive.
struct OUParams {
  double theta = 1.0;
  double sigma_sq = 1.0;

  /// Long-run variance sigma^2 / (2 theta).
  double stationary_variance() const noexcept { return sigma_sq / (2.0 * theta); }

  void validate() const;
};

/// Uniform observation grid: n_steps transitions of width dt.
struct GridSpec {
  double dt = 0.01;
  int n_steps = 500;

  double horizon() const noexcept { return dt * static_cast<double>(n_steps); }

  void validate() const;
};

/// A sampled path of n_steps + 1 states, x[i] observed at t = i * dt.
struct Trajectory {
  Eigen::VectorXd x;
  GridSpec grid;

  void validate() const;
};

/// Gaussian conditional law of X_{t+dt} given X_t.
struct TransitionMoments {
  double mean = 0.0;
  double variance = 0.0;
};

enum class InitMode { uniform_k_sigma, fixed, stationary };

/// Initial-value law and stream seed for the exact simulator.
/// uniform_k_sigma draws X0 ~ Uniform[-k sigma, k sigma]; stationary draws
/// X0 ~ Normal(0, sigma^2 / 2 theta); fixed starts at x0.
struct SimConfig {
  double k = 30.0;
  std::uint64_t seed = 0;
  InitMode init_mode = InitMode::uniform_k_sigma;
  double x0 = 0.0;

  void validate() const;
};

/// One-step conditional mean factor e^{-theta dt}.
template <class Scalar>
Scalar conditional_mean_factor(Scalar theta, Scalar dt) {
  using std::exp;
  return exp(-theta * dt);
}

/// Conditional variance V(dt) = (sigma^2 / 2 theta)(1 - e^{-2 theta dt}),
/// via expm1 so theta*dt down to ~1e-300 keeps full relative accuracy.
template <class Scalar>
Scalar conditional_variance(Scalar theta, Scalar sigma_sq, Scalar dt) {
  using std::expm1;
  return -(sigma_sq / (2 * theta)) * expm1(-2 * theta * dt);
}

TransitionMoments transition_moments(const OUParams& params, double x_prev, double dt);

struct AnalyticMoments {
  double mean = 0.0;        // E[X_t]
  double variance = 0.0;    // Var[X_t]
  double covariance = 0.0;  // Cov(X_t, X_s) under a stationary start
};

/// Marginal mean/variance at time t from an initial law (x0_mean, x0_var),
/// plus the stationary-start covariance at lag |t - s|.
AnalyticMoments analytic_moments(const OUParams& params, double x0_mean, double x0_var,
                                 double t, double s);

/// log p(x at t+dt | x_prev at t) for the Gaussian transition law.
double transition_log_density(const OUParams& params, double x_prev, double x, double dt);

}  // namespace oukit
