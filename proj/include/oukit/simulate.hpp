#pragma once

#include <cstdint>
#include <vector>

#include "oukit/ou.hpp"

namespace oukit {

struct LabeledTrajectory {
  Trajectory trajectory;
  OUParams params;
};

/// Order-independent 64-bit key of a parameter pair (mix of the IEEE bit
/// patterns), so a dataset's streams do not depend on combination order.
std::uint64_t params_key(const OUParams& params) noexcept;

/// Stream seed for one trajectory: derive_seed(master, params_key, traj_index).
std::uint64_t trajectory_seed(std::uint64_t master_seed, const OUParams& params,
                              std::uint64_t traj_index) noexcept;

/// Samples a path from the exact conditional law: X0 per sim.init_mode, then
/// X_{i+1} = m X_i + sqrt(V) xi_i with (m, V) the one-step transition moments
/// and xi_i i.i.d. standard normal from the trajectory's SplitMix64 stream.
Trajectory simulate_exact(const OUParams& params, const GridSpec& grid, const SimConfig& sim);

/// count_per_params trajectories for every parameter combination, each from
/// its own derived stream; results are independent of thread count and of the
/// order combinations are listed in (up to labeling).
std::vector<LabeledTrajectory> simulate_batch(const std::vector<OUParams>& params_list,
                                              const GridSpec& grid, const SimConfig& sim,
                                              int count_per_params, int threads = 1);

}  // namespace oukit
