#include "oukit/ou.hpp"

#include <cmath>
#include <numbers>
#include <string>

namespace oukit {

void OUParams::validate() const {
  if (!(std::isfinite(theta) && theta > 0.0)) {
    throw ParameterDomainError("theta must be finite and > 0, got " + std::to_string(theta));
  }
  if (!(std::isfinite(sigma_sq) && sigma_sq > 0.0)) {
    throw ParameterDomainError("sigma_sq must be finite and > 0, got " +
                               std::to_string(sigma_sq));
  }
}

void GridSpec::validate() const {
  if (!(std::isfinite(dt) && dt > 0.0)) {
    throw DegenerateGrid("dt must be finite and > 0, got " + std::to_string(dt));
  }
  if (n_steps < 1) {
    throw DegenerateGrid("n_steps must be >= 1, got " + std::to_string(n_steps));
  }
}

void Trajectory::validate() const {
  grid.validate();
  if (x.size() != static_cast<Eigen::Index>(grid.n_steps) + 1) {
    throw DimensionMismatch("trajectory holds " + std::to_string(x.size()) +
                            " values, grid expects " + std::to_string(grid.n_steps + 1));
  }
  if (!x.allFinite()) {
    throw ParameterDomainError("trajectory contains non-finite values");
  }
}

void SimConfig::validate() const {
  if (!(std::isfinite(k) && k >= 0.0)) {
    throw ParameterDomainError("k must be finite and >= 0, got " + std::to_string(k));
  }
  if (init_mode == InitMode::fixed && !std::isfinite(x0)) {
    throw ParameterDomainError("fixed x0 must be finite");
  }
}

TransitionMoments transition_moments(const OUParams& params, double x_prev, double dt) {
  params.validate();
  if (!(std::isfinite(dt) && dt >= 0.0)) {
    throw DegenerateGrid("dt must be finite and >= 0, got " + std::to_string(dt));
  }
  TransitionMoments out;
  out.mean = x_prev * conditional_mean_factor(params.theta, dt);
  out.variance = conditional_variance(params.theta, params.sigma_sq, dt);
  return out;
}

AnalyticMoments analytic_moments(const OUParams& params, double x0_mean, double x0_var,
                                 double t, double s) {
  params.validate();
  if (!(t >= 0.0 && s >= 0.0)) {
    throw DegenerateGrid("times must be >= 0");
  }
  const double stat = params.stationary_variance();
  AnalyticMoments out;
  out.mean = x0_mean * std::exp(-params.theta * t);
  out.variance = stat + std::exp(-2.0 * params.theta * t) * (x0_var - stat);
  out.covariance = stat * std::exp(-params.theta * std::abs(t - s));
  return out;
}

double transition_log_density(const OUParams& params, double x_prev, double x, double dt) {
  params.validate();
  if (!(std::isfinite(dt) && dt > 0.0)) {
    throw DegenerateGrid("transition density needs dt > 0, got " + std::to_string(dt));
  }
  const double variance = conditional_variance(params.theta, params.sigma_sq, dt);
  const double residual = x - x_prev * conditional_mean_factor(params.theta, dt);
  return -0.5 * std::log(2.0 * std::numbers::pi * variance) -
         residual * residual / (2.0 * variance);
}

}  // namespace oukit
