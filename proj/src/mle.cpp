#include "oukit/mle.hpp"

#include <chrono>
#include <limits>
#include <cmath>
#include <string>

#include "oukit/optimize.hpp"

namespace oukit {

void MleConfig::validate() const {
  if (!(grad_tolerance > 0.0)) throw EmptyInput("grad_tolerance must be > 0");
  if (max_bfgs_iters < 1) throw EmptyInput("max_bfgs_iters must be >= 1");
  if (basin_hops < 0) throw EmptyInput("basin_hops must be >= 0");
  if (!(hop_scale > 0.0)) throw EmptyInput("hop_scale must be > 0");
  if (!(hop_temperature > 0.0)) throw EmptyInput("hop_temperature must be > 0");
  if (!(trigger_grad_norm > 0.0)) throw EmptyInput("trigger_grad_norm must be > 0");
}

namespace {

OUParams from_log(const Eigen::VectorXd& u) {
  return OUParams{std::exp(u[0]), std::exp(u[1])};
}

}  // namespace

EstimationResult fit_mle(const Trajectory& trajectory, const MleConfig& config) {
  config.validate();
  const auto t_start = std::chrono::steady_clock::now();

  const LikelihoodWorkspace workspace(trajectory);

  // Stage I: moment-matched start, with the spec'd fallback when the lag-1
  // correlation is undefined but the series still has spread.
  OUParams start;
  try {
    const GmmEstimate gmm = gmm_initialize(trajectory);
    start = OUParams{gmm.theta_hat, gmm.sigma_sq_hat};
  } catch (const ConstantSeries&) {
    const double mean = trajectory.x.mean();
    const double variance = (trajectory.x.array() - mean).square().sum() /
                            static_cast<double>(trajectory.x.size());
    if (!(variance > 0.0)) throw;
    start = OUParams{0.5, variance};
  }
  start.validate();

  // -log L over u = (log theta, log sigma_sq); positivity is structural.
  // Points where exp over/underflows evaluate to +inf so the line search
  // brackets away from them instead of aborting the fit.
  const Objective objective(2, [&workspace](const Eigen::VectorXd& u, Eigen::VectorXd& grad) {
    const OUParams params = from_log(u);
    if (!(params.theta > 0.0) || !(params.sigma_sq > 0.0) || !std::isfinite(params.theta) ||
        !std::isfinite(params.sigma_sq)) {
      grad.setZero();
      return std::numeric_limits<double>::infinity();
    }
    const Eigen::Vector2d g = workspace.gradient(params);
    grad[0] = -g[0] * params.theta;
    grad[1] = -g[1] * params.sigma_sq;
    return -workspace.log_likelihood(params);
  });

  Eigen::VectorXd u0(2);
  u0 << std::log(start.theta), std::log(start.sigma_sq);
  const double f_start = -workspace.log_likelihood(start);

  EstimationResult result;
  result.params_hat = start;
  result.log_likelihood = -f_start;
  result.stage_reached = MleStage::gmm;

  // Stage II: BFGS refinement.
  BfgsOptions bfgs_options;
  bfgs_options.grad_tolerance = config.grad_tolerance;
  bfgs_options.max_iters = config.max_bfgs_iters;
  bfgs_options.on_iterate = config.on_iterate;
  const BfgsResult refined = bfgs_minimize(objective, u0, bfgs_options);
  result.iterations = refined.iterations;
  result.stage_reached = MleStage::bfgs;

  bool have_refined = std::isfinite(refined.f);
  if (have_refined && refined.f <= f_start) {
    result.params_hat = from_log(refined.x);
    result.log_likelihood = -refined.f;
    result.converged = refined.converged;
  }

  const bool fire_stage_three = [&] {
    if (config.basin_hops == 0) return false;
    switch (config.trigger) {
      case BasinHopTrigger::always:
        return true;
      case BasinHopTrigger::never:
        return false;
      case BasinHopTrigger::automatic:
        return !refined.converged || refined.grad.norm() > config.trigger_grad_norm ||
               !have_refined || refined.f > f_start;
    }
    return false;
  }();

  if (fire_stage_three) {
    HopConfig hop;
    hop.n_hops = config.basin_hops;
    hop.step_scale = config.hop_scale;
    hop.temperature = config.hop_temperature;
    hop.seed = config.hop_seed;
    hop.bfgs = bfgs_options;
    hop.bfgs.on_iterate = nullptr;  // trace covers the stage-II descent only
    const Eigen::VectorXd hop_start = have_refined && refined.f <= f_start ? refined.x : u0;
    const HopResult hopped = basin_hop(objective, hop_start, hop);
    result.iterations += hopped.total_bfgs_iterations;
    result.stage_reached = MleStage::basinhop;
    if (std::isfinite(hopped.f) && -hopped.f >= result.log_likelihood) {
      result.params_hat = from_log(hopped.x);
      result.log_likelihood = -hopped.f;
      result.converged = hopped.grad.norm() < config.grad_tolerance;
    }
  }

  if (!std::isfinite(result.log_likelihood)) {
    throw OptimizationFailed("no stage produced a finite log-likelihood");
  }
  result.params_hat.validate();
  result.wall_time_s =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
  return result;
}

}  // namespace oukit
