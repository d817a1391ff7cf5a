#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <vector>

#include "oukit/errors.hpp"

namespace oukit {

/// One LSTM layer. Gate rows are stacked [input; forget; cell; output], each
/// block hidden_size rows, with separate input and hidden biases:
///   z_t = w_ih x_t + b_ih + w_hh h_{t-1} + b_hh
///   i,f,o = sigmoid(z blocks), g = tanh(z block)
///   c_t = f (*) c_{t-1} + i (*) g,  h_t = o (*) tanh(c_t)
struct LstmLayerWeights {
  Eigen::MatrixXd w_ih;  // 4*hidden x input
  Eigen::MatrixXd w_hh;  // 4*hidden x hidden
  Eigen::VectorXd b_ih;  // 4*hidden
  Eigen::VectorXd b_hh;  // 4*hidden

  Eigen::Index hidden_size() const noexcept { return w_hh.cols(); }
  Eigen::Index input_size() const noexcept { return w_ih.cols(); }
};

/// Hidden/cell pair of one layer (columns = batch elements).
struct LstmState {
  Eigen::MatrixXd h;
  Eigen::MatrixXd c;
};

/// Corpus-level affine input transform, fitted on the training split.
struct Normalizer {
  double shift = 0.0;
  double scale = 1.0;

  double normalize(double x) const noexcept { return (x - shift) / scale; }
  double denormalize(double z) const noexcept { return z * scale + shift; }

  template <class Derived>
  auto normalize(const Eigen::MatrixBase<Derived>& x) const {
    return ((x.array() - shift) / scale).matrix();
  }
};

double elu(double x, double alpha);
double elu_derivative(double x, double alpha);

/// Two stacked LSTM layers (layer 0 reads the scalar input), an elementwise
/// ELU on the final hidden state, and a linear head to (theta, sigma_sq).
struct LstmModel {
  std::vector<LstmLayerWeights> layers;
  Eigen::MatrixXd w_out;  // 2 x hidden
  Eigen::VectorXd b_out;  // 2
  double elu_alpha = 1.0;
  Normalizer normalizer;

  Eigen::Index hidden_size() const { return layers.empty() ? 0 : layers.front().hidden_size(); }
  Eigen::Index n_layers() const noexcept { return static_cast<Eigen::Index>(layers.size()); }

  void validate() const;

  /// All weights and biases uniform in [-1/sqrt(hidden), 1/sqrt(hidden)],
  /// filled from one SplitMix64 stream in declaration order.
  static LstmModel init(int hidden_size, int n_layers, std::uint64_t seed,
                        double elu_alpha = 1.0);
};

/// Forward-pass activations kept for backpropagation through time.
struct LstmCache {
  Eigen::MatrixXd inputs;  // T x B, already normalized
  struct Step {
    Eigen::MatrixXd i, f, g, o;  // gate activations, hidden x B
    Eigen::MatrixXd c, h;        // states after the step
  };
  std::vector<std::vector<Step>> steps;  // [layer][t]
  Eigen::Index hidden = 0;
  Eigen::Index n_layers = 0;
  Eigen::Index seq_len = 0;
  Eigen::Index batch = 0;
};

/// Batched forward pass over normalized inputs (T x B); returns 2 x B
/// predictions. Pass a cache to keep activations for lstm_backward.
Eigen::MatrixXd lstm_forward(const LstmModel& model, const Eigen::MatrixXd& inputs,
                             LstmCache* cache = nullptr);

struct LstmGradients {
  std::vector<LstmLayerWeights> layers;
  Eigen::MatrixXd w_out;
  Eigen::VectorXd b_out;

  static LstmGradients zeros_like(const LstmModel& model);
};

/// Reverse accumulation through both layers and all time steps. output_grad
/// is dLoss/dPredictions (2 x B) for the forward pass that filled the cache.
LstmGradients lstm_backward(const LstmModel& model, const LstmCache& cache,
                            const Eigen::MatrixXd& output_grad);

}  // namespace oukit
