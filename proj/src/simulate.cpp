#include "oukit/simulate.hpp"

#include <bit>
#include <cmath>

#include "oukit/parallel.hpp"
#include "oukit/rng.hpp"

namespace oukit {

std::uint64_t params_key(const OUParams& params) noexcept {
  const auto theta_bits = std::bit_cast<std::uint64_t>(params.theta);
  const auto sigma_bits = std::bit_cast<std::uint64_t>(params.sigma_sq);
  return SplitMix64::mix(SplitMix64::mix(theta_bits) + sigma_bits);
}

std::uint64_t trajectory_seed(std::uint64_t master_seed, const OUParams& params,
                              std::uint64_t traj_index) noexcept {
  return derive_seed(master_seed, params_key(params), traj_index);
}

namespace {

double draw_initial(const OUParams& params, const SimConfig& sim, SplitMix64& rng) {
  switch (sim.init_mode) {
    case InitMode::uniform_k_sigma: {
      const double half_width = sim.k * std::sqrt(params.sigma_sq);
      return rng.next_uniform(-half_width, half_width);
    }
    case InitMode::stationary:
      return std::sqrt(params.stationary_variance()) * rng.next_normal();
    case InitMode::fixed:
      return sim.x0;
  }
  return sim.x0;
}

}  // namespace

Trajectory simulate_exact(const OUParams& params, const GridSpec& grid, const SimConfig& sim) {
  params.validate();
  grid.validate();
  sim.validate();

  SplitMix64 rng(sim.seed);
  Trajectory out;
  out.grid = grid;
  out.x.resize(grid.n_steps + 1);
  out.x[0] = draw_initial(params, sim, rng);

  // The grid is uniform, so the conditional moments are step-invariant.
  const double mean_factor = conditional_mean_factor(params.theta, grid.dt);
  const double step_sd = std::sqrt(conditional_variance(params.theta, params.sigma_sq, grid.dt));
  for (int i = 0; i < grid.n_steps; ++i) {
    out.x[i + 1] = mean_factor * out.x[i] + step_sd * rng.next_normal();
  }
  return out;
}

std::vector<LabeledTrajectory> simulate_batch(const std::vector<OUParams>& params_list,
                                              const GridSpec& grid, const SimConfig& sim,
                                              int count_per_params, int threads) {
  if (count_per_params < 1) {
    throw EmptyInput("count_per_params must be >= 1, got " + std::to_string(count_per_params));
  }
  grid.validate();
  sim.validate();
  for (const auto& params : params_list) params.validate();

  const std::size_t total = params_list.size() * static_cast<std::size_t>(count_per_params);
  std::vector<LabeledTrajectory> out(total);
  parallel_for(total, threads, [&](std::size_t task) {
    const std::size_t param_idx = task / static_cast<std::size_t>(count_per_params);
    const std::uint64_t traj_idx = task % static_cast<std::size_t>(count_per_params);
    const OUParams& params = params_list[param_idx];
    SimConfig traj_sim = sim;
    traj_sim.seed = trajectory_seed(sim.seed, params, traj_idx);
    out[task] = LabeledTrajectory{simulate_exact(params, grid, traj_sim), params};
  });
  return out;
}

}  // namespace oukit
