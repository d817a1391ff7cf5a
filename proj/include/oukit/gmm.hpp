#pragma once

#include "oukit/ou.hpp"

namespace oukit {

/// Moment-matched starting point: rho_hat is the clamped lag-1 correlation,
/// theta_hat = max(-log(rho_hat)/dt, 0.5), sigma_sq_hat = 2 theta_hat Var(X)
/// with the population (1/N) variance. Flags record which clamps were binding.
struct GmmEstimate {
  double theta_hat = 0.0;
  double sigma_sq_hat = 0.0;
  double rho_hat = 0.0;
  bool rho_clamped = false;
  bool theta_floored = false;
};

GmmEstimate gmm_initialize(const Trajectory& trajectory);

}  // namespace oukit
