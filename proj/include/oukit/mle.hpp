#pragma once

#include <cstdint>
#include <functional>

#include "oukit/gmm.hpp"
#include "oukit/likelihood.hpp"
#include "oukit/optimize.hpp"
#include "oukit/ou.hpp"

namespace oukit {

enum class MleStage { gmm, bfgs, basinhop };

/// When stage III (basin-hopping) runs. automatic = after a stage-II result
/// that failed to converge, kept a gradient norm above trigger_grad_norm, or
/// came out worse than the stage-I start.
enum class BasinHopTrigger { automatic, always, never };

struct MleConfig {
  double grad_tolerance = 1e-6;
  int max_bfgs_iters = 200;
  int basin_hops = 50;  // 0 disables stage III
  double hop_scale = 0.5;
  double hop_temperature = 1.0;
  BasinHopTrigger trigger = BasinHopTrigger::automatic;
  double trigger_grad_norm = 1e-3;
  std::uint64_t hop_seed = 0x6F756B6974ULL;
  std::function<void(const BfgsIterate&)> on_iterate;  // stage-II trace hook

  void validate() const;
};

struct EstimationResult {
  OUParams params_hat;
  double log_likelihood = 0.0;
  bool converged = false;
  MleStage stage_reached = MleStage::gmm;
  int iterations = 0;  // BFGS iterations across all stages
  double wall_time_s = 0.0;
};

/// Three-stage maximum-likelihood fit: moment-matched start, BFGS refinement
/// of -log L over (log theta, log sigma_sq), and basin-hopping when the
/// trigger fires. Returns the best point seen across stages; the reported
/// likelihood is never below the starting point's.
EstimationResult fit_mle(const Trajectory& trajectory, const MleConfig& config = {});

}  // namespace oukit
