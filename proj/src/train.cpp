#include "oukit/train.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "oukit/rng.hpp"

namespace oukit {

double huber_loss(double residual, double delta) {
  const double a = std::abs(residual);
  return a <= delta ? 0.5 * residual * residual : delta * (a - 0.5 * delta);
}

double huber_derivative(double residual, double delta) {
  return std::abs(residual) <= delta ? residual : std::copysign(delta, residual);
}

void LossConfig::validate() const {
  if (!(delta > 0.0)) throw EmptyInput("delta must be > 0");
  if (w_theta < 0.0 || w_sigma_sq < 0.0 || (w_theta == 0.0 && w_sigma_sq == 0.0)) {
    throw EmptyInput("loss weights must be >= 0 and not both zero");
  }
}

double composite_loss(const Eigen::Vector2d& pred, const Eigen::Vector2d& target,
                      const LossConfig& config) {
  return config.w_theta * huber_loss(pred[0] - target[0], config.delta) +
         config.w_sigma_sq * huber_loss(pred[1] - target[1], config.delta);
}

Eigen::Vector2d composite_loss_gradient(const Eigen::Vector2d& pred,
                                        const Eigen::Vector2d& target,
                                        const LossConfig& config) {
  return {config.w_theta * huber_derivative(pred[0] - target[0], config.delta),
          config.w_sigma_sq * huber_derivative(pred[1] - target[1], config.delta)};
}

void TrainConfig::validate() const {
  if (epochs < 0) throw EmptyInput("epochs must be >= 0");
  if (batch_size < 1) throw EmptyInput("batch_size must be >= 1");
  if (!(learning_rate >= 0.0)) throw EmptyInput("learning_rate must be >= 0");
  if (!(split_fraction > 0.0 && split_fraction < 1.0)) {
    throw EmptyInput("split_fraction must lie in (0, 1)");
  }
  if (!(adam_beta1 >= 0.0 && adam_beta1 < 1.0) || !(adam_beta2 >= 0.0 && adam_beta2 < 1.0)) {
    throw EmptyInput("adam betas must lie in [0, 1)");
  }
  if (!(adam_eps > 0.0)) throw EmptyInput("adam_eps must be > 0");
  if (hidden_size < 1) throw EmptyInput("hidden_size must be >= 1");
}

void adam_update(Eigen::Ref<Eigen::ArrayXd> param, const Eigen::Ref<const Eigen::ArrayXd>& grad,
                 Eigen::Ref<Eigen::ArrayXd> m, Eigen::Ref<Eigen::ArrayXd> v, long step,
                 const TrainConfig& config) {
  m = config.adam_beta1 * m + (1.0 - config.adam_beta1) * grad;
  v = config.adam_beta2 * v + (1.0 - config.adam_beta2) * grad.square();
  const double m_corr = 1.0 - std::pow(config.adam_beta1, static_cast<double>(step));
  const double v_corr = 1.0 - std::pow(config.adam_beta2, static_cast<double>(step));
  param -= config.learning_rate * (m / m_corr) / ((v / v_corr).sqrt() + config.adam_eps);
}

AdamState AdamState::zeros_like(const LstmModel& model) {
  return AdamState{LstmGradients::zeros_like(model), LstmGradients::zeros_like(model), 0};
}

namespace {

template <class Tensor>
void adam_tensor(Tensor& param, const Tensor& grad, Tensor& m, Tensor& v, long step,
                 const TrainConfig& config) {
  adam_update(Eigen::Map<Eigen::ArrayXd>(param.data(), param.size()),
              Eigen::Map<const Eigen::ArrayXd>(grad.data(), grad.size()),
              Eigen::Map<Eigen::ArrayXd>(m.data(), m.size()),
              Eigen::Map<Eigen::ArrayXd>(v.data(), v.size()), step, config);
}

}  // namespace

void adam_step(LstmModel& model, const LstmGradients& grads, AdamState& state,
               const TrainConfig& config) {
  if (grads.layers.size() != model.layers.size()) {
    throw DimensionMismatch("gradients do not match the model layout");
  }
  const long step = ++state.step;
  for (std::size_t l = 0; l < model.layers.size(); ++l) {
    adam_tensor(model.layers[l].w_ih, grads.layers[l].w_ih, state.m.layers[l].w_ih,
                state.v.layers[l].w_ih, step, config);
    adam_tensor(model.layers[l].w_hh, grads.layers[l].w_hh, state.m.layers[l].w_hh,
                state.v.layers[l].w_hh, step, config);
    adam_tensor(model.layers[l].b_ih, grads.layers[l].b_ih, state.m.layers[l].b_ih,
                state.v.layers[l].b_ih, step, config);
    adam_tensor(model.layers[l].b_hh, grads.layers[l].b_hh, state.m.layers[l].b_hh,
                state.v.layers[l].b_hh, step, config);
  }
  adam_tensor(model.w_out, grads.w_out, state.m.w_out, state.v.w_out, step, config);
  adam_tensor(model.b_out, grads.b_out, state.m.b_out, state.v.b_out, step, config);
}

namespace {

std::vector<std::size_t> shuffled_indices(std::size_t n, std::uint64_t seed) {
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  SplitMix64 rng(seed);
  for (std::size_t i = n; i > 1; --i) {
    const std::size_t j = static_cast<std::size_t>(rng.next_u64() % i);
    std::swap(order[i - 1], order[j]);
  }
  return order;
}

// T x B input block and 2 x B targets for the given dataset rows.
void fill_batch(const std::vector<LabeledTrajectory>& dataset,
                const std::vector<std::size_t>& order, std::size_t begin, std::size_t end,
                const Normalizer& normalizer, Eigen::MatrixXd& inputs,
                Eigen::MatrixXd& targets) {
  const Eigen::Index seq_len = dataset[order[begin]].trajectory.x.size();
  const Eigen::Index batch = static_cast<Eigen::Index>(end - begin);
  inputs.resize(seq_len, batch);
  targets.resize(2, batch);
  for (Eigen::Index b = 0; b < batch; ++b) {
    const auto& item = dataset[order[begin + static_cast<std::size_t>(b)]];
    inputs.col(b) = normalizer.normalize(item.trajectory.x);
    targets(0, b) = item.params.theta;
    targets(1, b) = item.params.sigma_sq;
  }
}

double dataset_loss(const LstmModel& model, const std::vector<LabeledTrajectory>& dataset,
                    const std::vector<std::size_t>& order, std::size_t begin, std::size_t end,
                    int batch_size, const LossConfig& loss) {
  double total = 0.0;
  Eigen::MatrixXd inputs, targets;
  for (std::size_t at = begin; at < end; at += static_cast<std::size_t>(batch_size)) {
    const std::size_t stop = std::min(end, at + static_cast<std::size_t>(batch_size));
    fill_batch(dataset, order, at, stop, model.normalizer, inputs, targets);
    const Eigen::MatrixXd pred = lstm_forward(model, inputs);
    for (Eigen::Index b = 0; b < pred.cols(); ++b) {
      total += composite_loss(pred.col(b), targets.col(b), loss);
    }
  }
  return total / static_cast<double>(end - begin);
}

}  // namespace

TrainResult train(const std::vector<LabeledTrajectory>& dataset, const TrainConfig& config,
                  const LossConfig& loss) {
  config.validate();
  loss.validate();
  if (dataset.empty()) throw EmptyDataset("training needs at least one trajectory");
  const Eigen::Index seq_len = dataset.front().trajectory.x.size();
  for (const auto& item : dataset) {
    item.trajectory.validate();
    item.params.validate();
    if (item.trajectory.x.size() != seq_len) {
      throw DimensionMismatch("dataset trajectories have mixed lengths");
    }
  }

  const std::size_t n = dataset.size();
  const std::vector<std::size_t> split_order = shuffled_indices(n, derive_seed(config.seed, 0, 0));
  std::size_t n_train = static_cast<std::size_t>(
      std::floor(config.split_fraction * static_cast<double>(n)));
  if (n >= 2) n_train = std::clamp<std::size_t>(n_train, 1, n - 1);
  if (n == 1) n_train = 1;
  const std::size_t n_val = n - n_train;

  TrainResult result;
  result.n_train = static_cast<Eigen::Index>(n_train);
  result.n_val = static_cast<Eigen::Index>(n_val);

  // Corpus-level affine normalizer from the training split only.
  double sum = 0.0, sum_sq = 0.0;
  for (std::size_t i = 0; i < n_train; ++i) {
    const auto& x = dataset[split_order[i]].trajectory.x;
    sum += x.sum();
    sum_sq += x.squaredNorm();
  }
  const double count = static_cast<double>(n_train) * static_cast<double>(seq_len);
  const double mean = sum / count;
  const double variance = std::max(sum_sq / count - mean * mean, 0.0);
  Normalizer normalizer;
  normalizer.shift = mean;
  normalizer.scale = std::max(std::sqrt(variance), 1e-12);

  LstmModel model = LstmModel::init(config.hidden_size, 2, derive_seed(config.seed, 1, 0));
  model.normalizer = normalizer;
  AdamState adam = AdamState::zeros_like(model);

  std::vector<std::size_t> train_order(split_order.begin(),
                                       split_order.begin() + static_cast<std::ptrdiff_t>(n_train));
  Eigen::MatrixXd inputs, targets;
  LstmCache cache;

  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    const std::vector<std::size_t> epoch_perm =
        shuffled_indices(n_train, derive_seed(config.seed, 2, static_cast<std::uint64_t>(epoch)));
    double epoch_loss = 0.0;

    for (std::size_t at = 0; at < n_train; at += static_cast<std::size_t>(config.batch_size)) {
      const std::size_t stop = std::min(n_train, at + static_cast<std::size_t>(config.batch_size));
      std::vector<std::size_t> rows(epoch_perm.begin() + static_cast<std::ptrdiff_t>(at),
                                    epoch_perm.begin() + static_cast<std::ptrdiff_t>(stop));
      for (auto& r : rows) r = train_order[r];
      fill_batch(dataset, rows, 0, rows.size(), normalizer, inputs, targets);

      const Eigen::MatrixXd pred = lstm_forward(model, inputs, &cache);
      const Eigen::Index batch = pred.cols();
      Eigen::MatrixXd output_grad(2, batch);
      for (Eigen::Index b = 0; b < batch; ++b) {
        epoch_loss += composite_loss(pred.col(b), targets.col(b), loss);
        output_grad.col(b) =
            composite_loss_gradient(pred.col(b), targets.col(b), loss) /
            static_cast<double>(batch);
      }
      const LstmGradients grads = lstm_backward(model, cache, output_grad);
      adam_step(model, grads, adam, config);
    }

    EpochStats stats;
    stats.train_loss = epoch_loss / static_cast<double>(n_train);
    stats.val_loss = n_val > 0 ? dataset_loss(model, dataset, split_order, n_train, n,
                                              config.batch_size, loss)
                               : std::numeric_limits<double>::quiet_NaN();
    result.curve.push_back(stats);
  }

  result.model = std::move(model);
  return result;
}

std::vector<Eigen::Vector2d> infer(const LstmModel& model,
                                   const std::vector<Trajectory>& trajectories) {
  model.validate();
  std::vector<Eigen::Vector2d> estimates;
  if (trajectories.empty()) return estimates;
  const Eigen::Index seq_len = trajectories.front().x.size();
  for (const auto& trajectory : trajectories) {
    if (trajectory.x.size() != seq_len) {
      throw DimensionMismatch("inference batch has mixed sequence lengths");
    }
  }

  constexpr std::size_t kChunk = 256;
  estimates.reserve(trajectories.size());
  Eigen::MatrixXd inputs;
  for (std::size_t at = 0; at < trajectories.size(); at += kChunk) {
    const std::size_t stop = std::min(trajectories.size(), at + kChunk);
    inputs.resize(seq_len, static_cast<Eigen::Index>(stop - at));
    for (std::size_t i = at; i < stop; ++i) {
      inputs.col(static_cast<Eigen::Index>(i - at)) =
          model.normalizer.normalize(trajectories[i].x);
    }
    const Eigen::MatrixXd pred = lstm_forward(model, inputs);
    for (Eigen::Index b = 0; b < pred.cols(); ++b) estimates.emplace_back(pred.col(b));
  }
  return estimates;
}

}  // namespace oukit
