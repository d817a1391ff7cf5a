#include "oukit/likelihood.hpp"

#include <cmath>
#include <numbers>

namespace oukit {

LikelihoodWorkspace::LikelihoodWorkspace(const Trajectory& trajectory) {
  trajectory.validate();
  const Eigen::Index n = trajectory.grid.n_steps;
  head_ = trajectory.x.head(n);
  tail_ = trajectory.x.tail(n);
  residual_.resize(n);
  dt_ = trajectory.grid.dt;
}

double LikelihoodWorkspace::log_likelihood(const OUParams& params) const {
  params.validate();
  const double n = static_cast<double>(head_.size());
  const double mean_factor = conditional_mean_factor(params.theta, dt_);
  const double variance = conditional_variance(params.theta, params.sigma_sq, dt_);
  residual_ = tail_ - mean_factor * head_;
  return -0.5 * n * std::log(2.0 * std::numbers::pi * variance) -
         residual_.squaredNorm() / (2.0 * variance);
}

Eigen::Vector2d LikelihoodWorkspace::gradient(const OUParams& params) const {
  params.validate();
  const double n = static_cast<double>(head_.size());
  const double theta = params.theta;
  const double m = conditional_mean_factor(theta, dt_);
  const double v = conditional_variance(theta, params.sigma_sq, dt_);
  residual_ = tail_ - m * head_;
  const double sum_sq = residual_.squaredNorm();
  const double cross = residual_.dot(head_);

  // dV/dtheta = sigma^2 dt m^2 / theta - V / theta; dV/dsigma^2 = V / sigma^2.
  const double dv_dtheta = (params.sigma_sq * dt_ * m * m - v) / theta;
  const double shared = (sum_sq - n * v) / (2.0 * v * v);

  Eigen::Vector2d grad;
  grad[0] = dv_dtheta * shared - (dt_ * m / v) * cross;
  grad[1] = (v / params.sigma_sq) * shared;
  return grad;
}

double log_likelihood(const OUParams& params, const Trajectory& trajectory) {
  return LikelihoodWorkspace(trajectory).log_likelihood(params);
}

Eigen::Vector2d log_likelihood_gradient(const OUParams& params, const Trajectory& trajectory) {
  return LikelihoodWorkspace(trajectory).gradient(params);
}

}  // namespace oukit
