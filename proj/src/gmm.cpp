#include "oukit/gmm.hpp"

#include <algorithm>
#include <cmath>

namespace oukit {

namespace {
constexpr double kRhoMin = 1e-4;
constexpr double kRhoMax = 0.999;
constexpr double kThetaFloor = 0.5;
}  // namespace

GmmEstimate gmm_initialize(const Trajectory& trajectory) {
  trajectory.validate();
  const Eigen::VectorXd& x = trajectory.x;
  const Eigen::Index total = x.size();
  if (total < 3) {
    throw TooShort("lag-1 correlation needs at least 3 observations, got " +
                   std::to_string(total));
  }

  const Eigen::Index n = total - 1;
  const auto head = x.head(n).array();
  const auto tail = x.tail(n).array();
  const double head_mean = head.mean();
  const double tail_mean = tail.mean();
  const double cov = ((head - head_mean) * (tail - tail_mean)).sum();
  const double head_ss = (head - head_mean).square().sum();
  const double tail_ss = (tail - tail_mean).square().sum();
  if (head_ss <= 0.0 || tail_ss <= 0.0) {
    throw ConstantSeries("lag-1 correlation undefined: a lagged slice has zero variance");
  }

  GmmEstimate est;
  const double rho = cov / std::sqrt(head_ss * tail_ss);
  est.rho_hat = std::clamp(rho, kRhoMin, kRhoMax);
  est.rho_clamped = est.rho_hat != rho;

  const double theta_raw = -std::log(est.rho_hat) / trajectory.grid.dt;
  est.theta_hat = std::max(theta_raw, kThetaFloor);
  est.theta_floored = theta_raw < kThetaFloor;

  const double mean = x.mean();
  const double variance = (x.array() - mean).square().sum() / static_cast<double>(total);
  est.sigma_sq_hat = 2.0 * est.theta_hat * variance;
  return est;
}

}  // namespace oukit
