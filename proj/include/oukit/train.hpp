#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <vector>

#include "oukit/lstm.hpp"
#include "oukit/simulate.hpp"

namespace oukit {

/// Quadratic below delta, linear above: r^2/2 if |r| <= delta, else
/// delta (|r| - delta/2).
double huber_loss(double residual, double delta);
double huber_derivative(double residual, double delta);

struct LossConfig {
  double delta = 1.0;
  double w_theta = 1.0;
  double w_sigma_sq = 0.5;

  void validate() const;
};

/// w_theta * huber(theta residual) + w_sigma_sq * huber(sigma_sq residual).
double composite_loss(const Eigen::Vector2d& pred, const Eigen::Vector2d& target,
                      const LossConfig& config);
Eigen::Vector2d composite_loss_gradient(const Eigen::Vector2d& pred,
                                        const Eigen::Vector2d& target,
                                        const LossConfig& config);

struct TrainConfig {
  int epochs = 100;
  int batch_size = 128;
  double learning_rate = 0.001;
  double split_fraction = 0.8;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_eps = 1e-8;
  std::uint64_t seed = 0;
  int hidden_size = 32;

  void validate() const;
};

/// One elementwise Adam update with bias correction; step is 1-based.
void adam_update(Eigen::Ref<Eigen::ArrayXd> param, const Eigen::Ref<const Eigen::ArrayXd>& grad,
                 Eigen::Ref<Eigen::ArrayXd> m, Eigen::Ref<Eigen::ArrayXd> v, long step,
                 const TrainConfig& config);

/// First/second-moment buffers shaped like the model's tensors.
struct AdamState {
  LstmGradients m;
  LstmGradients v;
  long step = 0;

  static AdamState zeros_like(const LstmModel& model);
};

void adam_step(LstmModel& model, const LstmGradients& grads, AdamState& state,
               const TrainConfig& config);

struct EpochStats {
  double train_loss = 0.0;
  double val_loss = 0.0;
};

struct TrainResult {
  LstmModel model;
  std::vector<EpochStats> curve;
  Eigen::Index n_train = 0;
  Eigen::Index n_val = 0;
};

/// Seeded shuffled split (floor(split_fraction * N), clamped to keep both
/// sides nonempty for N >= 2), corpus normalizer fitted on the training split,
/// then per-epoch minibatch Adam on the composite loss. Targets are raw
/// (theta, sigma_sq). The curve records mean train loss over each epoch's
/// minibatches and validation loss at each epoch's end.
TrainResult train(const std::vector<LabeledTrajectory>& dataset, const TrainConfig& config,
                  const LossConfig& loss);

/// Forward-only estimates for same-length trajectories, using the stored
/// normalizer; no state is carried between trajectories.
std::vector<Eigen::Vector2d> infer(const LstmModel& model,
                                   const std::vector<Trajectory>& trajectories);

}  // namespace oukit
