#include "oukit/lstm.hpp"

#include <cmath>
#include <string>

#include "oukit/rng.hpp"

namespace oukit {

double elu(double x, double alpha) { return x > 0.0 ? x : alpha * std::expm1(x); }

double elu_derivative(double x, double alpha) { return x > 0.0 ? 1.0 : alpha * std::exp(x); }

void LstmModel::validate() const {
  if (layers.empty()) throw DimensionMismatch("model has no LSTM layers");
  Eigen::Index prev_out = layers.front().input_size();
  for (std::size_t l = 0; l < layers.size(); ++l) {
    const auto& layer = layers[l];
    const Eigen::Index hidden = layer.hidden_size();
    if (hidden < 1 || layer.input_size() < 1) {
      throw DimensionMismatch("layer " + std::to_string(l) + " has empty weights");
    }
    if (layer.w_ih.rows() != 4 * hidden || layer.w_hh.rows() != 4 * hidden ||
        layer.b_ih.size() != 4 * hidden || layer.b_hh.size() != 4 * hidden) {
      throw DimensionMismatch("layer " + std::to_string(l) + " gate blocks are inconsistent");
    }
    if (l > 0 && layer.input_size() != prev_out) {
      throw DimensionMismatch("layer " + std::to_string(l) + " input size " +
                              std::to_string(layer.input_size()) +
                              " != previous hidden size " + std::to_string(prev_out));
    }
    if (!layer.w_ih.allFinite() || !layer.w_hh.allFinite() || !layer.b_ih.allFinite() ||
        !layer.b_hh.allFinite()) {
      throw ParameterDomainError("layer " + std::to_string(l) + " has non-finite weights");
    }
    prev_out = hidden;
  }
  if (w_out.cols() != prev_out || b_out.size() != w_out.rows() || w_out.rows() < 1) {
    throw DimensionMismatch("output head does not match the top hidden size");
  }
  if (!w_out.allFinite() || !b_out.allFinite()) {
    throw ParameterDomainError("output head has non-finite weights");
  }
  if (!(elu_alpha > 0.0)) throw ParameterDomainError("elu_alpha must be > 0");
  if (!(normalizer.scale != 0.0) || !std::isfinite(normalizer.scale) ||
      !std::isfinite(normalizer.shift)) {
    throw ParameterDomainError("normalizer is degenerate");
  }
}

LstmModel LstmModel::init(int hidden_size, int n_layers, std::uint64_t seed, double elu_alpha) {
  if (hidden_size < 1 || n_layers < 1) {
    throw DimensionMismatch("hidden_size and n_layers must be >= 1");
  }
  const double bound = 1.0 / std::sqrt(static_cast<double>(hidden_size));
  SplitMix64 rng(seed);
  const auto fill = [&](auto& tensor) {
    for (Eigen::Index i = 0; i < tensor.size(); ++i) {
      tensor.data()[i] = rng.next_uniform(-bound, bound);
    }
  };

  LstmModel model;
  model.elu_alpha = elu_alpha;
  model.layers.resize(n_layers);
  Eigen::Index input = 1;
  for (auto& layer : model.layers) {
    layer.w_ih.resize(4 * hidden_size, input);
    layer.w_hh.resize(4 * hidden_size, hidden_size);
    layer.b_ih.resize(4 * hidden_size);
    layer.b_hh.resize(4 * hidden_size);
    fill(layer.w_ih);
    fill(layer.w_hh);
    fill(layer.b_ih);
    fill(layer.b_hh);
    input = hidden_size;
  }
  model.w_out.resize(2, hidden_size);
  model.b_out.resize(2);
  fill(model.w_out);
  fill(model.b_out);
  return model;
}

namespace {

Eigen::MatrixXd sigmoid(const Eigen::MatrixXd& z) {
  return (1.0 / (1.0 + (-z.array()).exp())).matrix();
}

}  // namespace

Eigen::MatrixXd lstm_forward(const LstmModel& model, const Eigen::MatrixXd& inputs,
                             LstmCache* cache) {
  model.validate();
  const Eigen::Index seq_len = inputs.rows();
  const Eigen::Index batch = inputs.cols();
  if (seq_len < 1 || batch < 1) throw DimensionMismatch("forward needs a nonempty T x B input");
  if (model.layers.front().input_size() != 1) {
    throw DimensionMismatch("layer 0 expects scalar inputs");
  }
  const Eigen::Index n_layers = model.n_layers();
  const Eigen::Index hidden = model.hidden_size();

  if (cache) {
    cache->inputs = inputs;
    cache->steps.assign(n_layers, std::vector<LstmCache::Step>(seq_len));
    cache->hidden = hidden;
    cache->n_layers = n_layers;
    cache->seq_len = seq_len;
    cache->batch = batch;
  }

  Eigen::MatrixXd layer_in;  // T x B for layer 0, then h-sequence stand-in below
  Eigen::MatrixXd z(4 * hidden, batch);
  std::vector<Eigen::MatrixXd> h_seq;  // per-step h of the current layer (input to the next)
  Eigen::MatrixXd h_top;

  for (Eigen::Index l = 0; l < n_layers; ++l) {
    const auto& w = model.layers[l];
    Eigen::MatrixXd h = Eigen::MatrixXd::Zero(hidden, batch);
    Eigen::MatrixXd c = Eigen::MatrixXd::Zero(hidden, batch);
    std::vector<Eigen::MatrixXd> next_h_seq;
    const bool feeds_next = l + 1 < n_layers;
    if (feeds_next && !cache) next_h_seq.resize(seq_len);

    for (Eigen::Index t = 0; t < seq_len; ++t) {
      if (l == 0) {
        z.noalias() = w.w_ih * inputs.row(t);
      } else if (cache) {
        z.noalias() = w.w_ih * cache->steps[l - 1][t].h;
      } else {
        z.noalias() = w.w_ih * h_seq[t];
      }
      z.noalias() += w.w_hh * h;
      z.colwise() += w.b_ih + w.b_hh;

      const Eigen::MatrixXd gate_i = sigmoid(z.topRows(hidden));
      const Eigen::MatrixXd gate_f = sigmoid(z.middleRows(hidden, hidden));
      const Eigen::MatrixXd gate_g = z.middleRows(2 * hidden, hidden).array().tanh().matrix();
      const Eigen::MatrixXd gate_o = sigmoid(z.bottomRows(hidden));

      c = (gate_f.array() * c.array() + gate_i.array() * gate_g.array()).matrix();
      h = (gate_o.array() * c.array().tanh()).matrix();

      if (cache) {
        auto& step = cache->steps[l][t];
        step.i = gate_i;
        step.f = gate_f;
        step.g = gate_g;
        step.o = gate_o;
        step.c = c;
        step.h = h;
      } else if (feeds_next) {
        next_h_seq[t] = h;
      }
    }
    h_seq = std::move(next_h_seq);
    if (l + 1 == n_layers) h_top = std::move(h);
  }

  const Eigen::MatrixXd activated =
      h_top.unaryExpr([&](double v) { return elu(v, model.elu_alpha); });
  Eigen::MatrixXd pred = model.w_out * activated;
  pred.colwise() += model.b_out;
  return pred;
}

LstmGradients LstmGradients::zeros_like(const LstmModel& model) {
  LstmGradients grads;
  grads.layers.resize(model.layers.size());
  for (std::size_t l = 0; l < model.layers.size(); ++l) {
    const auto& w = model.layers[l];
    grads.layers[l].w_ih = Eigen::MatrixXd::Zero(w.w_ih.rows(), w.w_ih.cols());
    grads.layers[l].w_hh = Eigen::MatrixXd::Zero(w.w_hh.rows(), w.w_hh.cols());
    grads.layers[l].b_ih = Eigen::VectorXd::Zero(w.b_ih.size());
    grads.layers[l].b_hh = Eigen::VectorXd::Zero(w.b_hh.size());
  }
  grads.w_out = Eigen::MatrixXd::Zero(model.w_out.rows(), model.w_out.cols());
  grads.b_out = Eigen::VectorXd::Zero(model.b_out.size());
  return grads;
}

LstmGradients lstm_backward(const LstmModel& model, const LstmCache& cache,
                            const Eigen::MatrixXd& output_grad) {
  model.validate();
  if (cache.n_layers != model.n_layers() || cache.hidden != model.hidden_size() ||
      cache.seq_len < 1 ||
      cache.steps.size() != static_cast<std::size_t>(cache.n_layers)) {
    throw CacheMismatch("cache does not match the model");
  }
  if (output_grad.rows() != model.w_out.rows() || output_grad.cols() != cache.batch) {
    throw CacheMismatch("output_grad is " + std::to_string(output_grad.rows()) + "x" +
                        std::to_string(output_grad.cols()) + ", expected " +
                        std::to_string(model.w_out.rows()) + "x" +
                        std::to_string(cache.batch));
  }

  const Eigen::Index hidden = cache.hidden;
  const Eigen::Index seq_len = cache.seq_len;
  const Eigen::Index batch = cache.batch;
  const Eigen::Index top = cache.n_layers - 1;

  LstmGradients grads = LstmGradients::zeros_like(model);

  // Head: pred = w_out elu(h_T) + b_out.
  const Eigen::MatrixXd& h_final = cache.steps[top][seq_len - 1].h;
  const Eigen::MatrixXd activated =
      h_final.unaryExpr([&](double v) { return elu(v, model.elu_alpha); });
  grads.w_out.noalias() = output_grad * activated.transpose();
  grads.b_out = output_grad.rowwise().sum();

  Eigen::MatrixXd dh_head = model.w_out.transpose() * output_grad;
  dh_head.array() *=
      h_final.unaryExpr([&](double v) { return elu_derivative(v, model.elu_alpha); }).array();

  // dx_stream[t]: gradient w.r.t. the input of the layer currently above.
  std::vector<Eigen::MatrixXd> dx_stream;
  Eigen::MatrixXd dz(4 * hidden, batch);

  for (Eigen::Index l = top; l >= 0; --l) {
    const auto& w = model.layers[l];
    auto& gl = grads.layers[l];
    std::vector<Eigen::MatrixXd> next_dx;
    if (l > 0) next_dx.resize(seq_len);

    Eigen::MatrixXd dh_carry = Eigen::MatrixXd::Zero(hidden, batch);
    Eigen::MatrixXd dc_carry = Eigen::MatrixXd::Zero(hidden, batch);

    for (Eigen::Index t = seq_len - 1; t >= 0; --t) {
      const auto& step = cache.steps[l][t];
      Eigen::MatrixXd dh = dh_carry;
      if (l == top && t == seq_len - 1) dh += dh_head;
      if (l < top) dh += dx_stream[t];

      const Eigen::ArrayXXd tanh_c = step.c.array().tanh();
      const Eigen::ArrayXXd d_out = dh.array() * tanh_c;
      const Eigen::ArrayXXd dc =
          dc_carry.array() + dh.array() * step.o.array() * (1.0 - tanh_c.square());

      const Eigen::ArrayXXd d_in = dc * step.g.array();
      const Eigen::ArrayXXd d_cell = dc * step.i.array();
      Eigen::ArrayXXd d_forget(hidden, batch);
      if (t > 0) {
        d_forget = dc * cache.steps[l][t - 1].c.array();
      } else {
        d_forget.setZero();  // c_{-1} = 0
      }
      dc_carry = (dc * step.f.array()).matrix();

      dz.topRows(hidden) = (d_in * step.i.array() * (1.0 - step.i.array())).matrix();
      dz.middleRows(hidden, hidden) =
          (d_forget * step.f.array() * (1.0 - step.f.array())).matrix();
      dz.middleRows(2 * hidden, hidden) = (d_cell * (1.0 - step.g.array().square())).matrix();
      dz.bottomRows(hidden) = (d_out * step.o.array() * (1.0 - step.o.array())).matrix();

      if (l == 0) {
        gl.w_ih.noalias() += dz * cache.inputs.row(t).transpose();
      } else {
        gl.w_ih.noalias() += dz * cache.steps[l - 1][t].h.transpose();
        next_dx[t].noalias() = w.w_ih.transpose() * dz;
      }
      if (t > 0) {
        gl.w_hh.noalias() += dz * cache.steps[l][t - 1].h.transpose();
      }
      const Eigen::VectorXd db = dz.rowwise().sum();
      gl.b_ih += db;
      gl.b_hh += db;

      dh_carry.noalias() = w.w_hh.transpose() * dz;
    }
    dx_stream = std::move(next_dx);
  }
  return grads;
}

}  // namespace oukit
