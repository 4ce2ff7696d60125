// sepfront/lstm.hpp

// Copyright 2026  The Sepfront Authors

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

// Bidirectional LSTM stack with a dense output head, forward evaluation and
// exact analytic gradients via backpropagation through time. Standard LSTM
// cells: no peepholes, sigmoid gates, tanh cell activation. Gate order inside
// every 4C-sized block is [input, forget, cell, output]; the forget segment
// is the one initialized to bias 1.
//
// forward/backward never mutate the parameters, so one parameter set can
// serve any number of concurrent sequences.

#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace sepfront {

enum class HeadKind : std::uint8_t {
  kSigmoid = 0,   // outputs in (0,1); masking and signal-approximation heads
  kSoftplus = 1,  // outputs in (0,inf); mapping heads
};

inline std::string head_name(HeadKind h) {
  return h == HeadKind::kSigmoid ? "sigmoid" : "softplus";
}

/// One direction of one layer: z = w_input * x + w_recurrent * h_prev + bias.
struct LstmDirectionWeights {
  Eigen::MatrixXd w_input;      // 4C x D_in
  Eigen::MatrixXd w_recurrent;  // 4C x C
  Eigen::VectorXd bias;         // 4C
};

struct LstmLayerWeights {
  LstmDirectionWeights fwd, bwd;
};

/// All weights of the stack plus the dense head. Layer l > 0 consumes the
/// 2 * cell_count concatenated hidden sequence of layer l - 1.
struct ModelParameters {
  std::vector<LstmLayerWeights> layers;
  Eigen::MatrixXd head_weight;  // output_dim x 2C
  Eigen::VectorXd head_bias;    // output_dim
  int layer_count = 0;
  int cell_count = 0;
  int input_dim = 0;
  int output_dim = 0;
};

/// Visits every parameter tensor in the fixed serialization order:
/// per layer fwd.w_input, fwd.w_recurrent, fwd.bias, bwd.{same}, then
/// head_weight, head_bias. Checkpoints, the optimizer and the gradient
/// checker all iterate through this single definition.
template <typename Params, typename Fn>
void for_each_tensor(Params &&p, Fn &&fn) {
  for (auto &layer : p.layers) {
    fn(layer.fwd.w_input);
    fn(layer.fwd.w_recurrent);
    fn(layer.fwd.bias);
    fn(layer.bwd.w_input);
    fn(layer.bwd.w_recurrent);
    fn(layer.bwd.bias);
  }
  fn(p.head_weight);
  fn(p.head_bias);
}

/// Same traversal with a human-readable name per tensor.
template <typename Params, typename Fn>
void for_each_named_tensor(Params &&p, Fn &&fn) {
  for (std::size_t l = 0; l < p.layers.size(); ++l) {
    const std::string prefix = "layer" + std::to_string(l);
    fn(prefix + "/fwd/w_input", p.layers[l].fwd.w_input);
    fn(prefix + "/fwd/w_recurrent", p.layers[l].fwd.w_recurrent);
    fn(prefix + "/fwd/bias", p.layers[l].fwd.bias);
    fn(prefix + "/bwd/w_input", p.layers[l].bwd.w_input);
    fn(prefix + "/bwd/w_recurrent", p.layers[l].bwd.w_recurrent);
    fn(prefix + "/bwd/bias", p.layers[l].bwd.bias);
  }
  fn("head/weight", p.head_weight);
  fn("head/bias", p.head_bias);
}

inline ModelParameters zeros_like(const ModelParameters &p) {
  ModelParameters z = p;
  for_each_tensor(z, [](auto &t) { t.setZero(); });
  return z;
}

/// dst += alpha * src over every tensor.
inline void axpy(double alpha, const ModelParameters &src, ModelParameters &dst) {
  auto it = [&](auto &dst_t, const auto &src_t) { dst_t += alpha * src_t; };
  for (std::size_t l = 0; l < dst.layers.size(); ++l) {
    it(dst.layers[l].fwd.w_input, src.layers[l].fwd.w_input);
    it(dst.layers[l].fwd.w_recurrent, src.layers[l].fwd.w_recurrent);
    it(dst.layers[l].fwd.bias, src.layers[l].fwd.bias);
    it(dst.layers[l].bwd.w_input, src.layers[l].bwd.w_input);
    it(dst.layers[l].bwd.w_recurrent, src.layers[l].bwd.w_recurrent);
    it(dst.layers[l].bwd.bias, src.layers[l].bwd.bias);
  }
  it(dst.head_weight, src.head_weight);
  it(dst.head_bias, src.head_bias);
}

inline void scale_parameters(ModelParameters &p, double s) {
  for_each_tensor(p, [s](auto &t) { t *= s; });
}

inline double squared_norm(const ModelParameters &p) {
  double acc = 0.0;
  for_each_tensor(const_cast<ModelParameters &>(p),
                  [&acc](auto &t) { acc += t.squaredNorm(); });
  return acc;
}

inline bool all_finite(const ModelParameters &p) {
  bool ok = true;
  for_each_tensor(const_cast<ModelParameters &>(p),
                  [&ok](auto &t) { ok = ok && t.allFinite(); });
  return ok;
}

namespace detail {

// Portable deterministic uniform in [0,1): the raw mt19937_64 stream is
// pinned by the standard, unlike std::uniform_real_distribution.
inline double uniform_unit(std::mt19937_64 &g) {
  return static_cast<double>(g() >> 11) * 0x1.0p-53;
}

inline double stable_sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

inline double stable_softplus(double x) {
  return std::max(x, 0.0) + std::log1p(std::exp(-std::abs(x)));
}

inline void fill_uniform(Eigen::Ref<Eigen::MatrixXd> m, double limit,
                         std::mt19937_64 &g) {
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      m(r, c) = limit * (2.0 * uniform_unit(g) - 1.0);
    }
  }
}

}  // namespace detail

/// Deterministic initialization: each weight matrix uniform in
/// [-1/sqrt(fan_in), +1/sqrt(fan_in)], biases zero except forget gates at 1.
inline ModelParameters init_parameters(int layer_count, int cell_count,
                                       int input_dim, int output_dim,
                                       std::uint64_t seed) {
  if (layer_count < 1 || cell_count < 1 || input_dim < 1 || output_dim < 1) {
    throw std::invalid_argument("model dimensions must be positive");
  }
  std::mt19937_64 rng(seed);
  ModelParameters p;
  p.layer_count = layer_count;
  p.cell_count = cell_count;
  p.input_dim = input_dim;
  p.output_dim = output_dim;
  p.layers.resize(layer_count);

  const int c = cell_count;
  for (int l = 0; l < layer_count; ++l) {
    const int d_in = (l == 0) ? input_dim : 2 * cell_count;
    for (LstmDirectionWeights *dir : {&p.layers[l].fwd, &p.layers[l].bwd}) {
      dir->w_input.resize(4 * c, d_in);
      dir->w_recurrent.resize(4 * c, c);
      dir->bias = Eigen::VectorXd::Zero(4 * c);
      detail::fill_uniform(dir->w_input, 1.0 / std::sqrt(double(d_in)), rng);
      detail::fill_uniform(dir->w_recurrent, 1.0 / std::sqrt(double(c)), rng);
      dir->bias.segment(c, c).setConstant(1.0);  // forget gates
    }
  }
  p.head_weight.resize(output_dim, 2 * c);
  detail::fill_uniform(p.head_weight, 1.0 / std::sqrt(2.0 * c), rng);
  p.head_bias = Eigen::VectorXd::Zero(output_dim);
  return p;
}

/// Everything backward() needs from a forward pass.
struct DirectionCache {
  Eigen::MatrixXd gates;   // T x 4C, post-activation, rows at physical frame index
  Eigen::MatrixXd cell;    // T x C
  Eigen::MatrixXd hidden;  // T x C
};

struct LayerCache {
  Eigen::MatrixXd input;  // T x D_in, what this layer consumed
  DirectionCache fwd, bwd;
};

struct ForwardCache {
  std::vector<LayerCache> layers;
  Eigen::MatrixXd hidden;  // T x 2C, final stack output before the head
  Eigen::MatrixXd output;  // T x output_dim, after the head
};

namespace detail {

/// Runs one direction over the physical frame order (start-to-end when
/// forward_dir, end-to-start otherwise). Cache rows stay at physical indices
/// so both directions line up frame for frame.
inline DirectionCache run_direction(const LstmDirectionWeights &w,
                                    const Eigen::MatrixXd &input,
                                    bool forward_dir) {
  const int t_count = static_cast<int>(input.rows());
  const int c_count = static_cast<int>(w.w_recurrent.cols());

  DirectionCache cache;
  cache.gates.resize(t_count, 4 * c_count);
  cache.cell.resize(t_count, c_count);
  cache.hidden.resize(t_count, c_count);

  // Input contributions for the whole sequence in one product.
  Eigen::MatrixXd pre = input * w.w_input.transpose();
  pre.rowwise() += w.bias.transpose();

  Eigen::VectorXd h = Eigen::VectorXd::Zero(c_count);
  Eigen::VectorXd c = Eigen::VectorXd::Zero(c_count);
  Eigen::VectorXd z(4 * c_count);
  for (int s = 0; s < t_count; ++s) {
    const int t = forward_dir ? s : t_count - 1 - s;
    z = pre.row(t).transpose() + w.w_recurrent * h;
    for (int j = 0; j < c_count; ++j) {
      const double gi = stable_sigmoid(z(j));
      const double gf = stable_sigmoid(z(c_count + j));
      const double gg = std::tanh(z(2 * c_count + j));
      const double go = stable_sigmoid(z(3 * c_count + j));
      const double cj = gf * c(j) + gi * gg;
      c(j) = cj;
      h(j) = go * std::tanh(cj);
      cache.gates(t, j) = gi;
      cache.gates(t, c_count + j) = gf;
      cache.gates(t, 2 * c_count + j) = gg;
      cache.gates(t, 3 * c_count + j) = go;
    }
    cache.cell.row(t) = c.transpose();
    cache.hidden.row(t) = h.transpose();
  }
  return cache;
}

/// BPTT through one direction. d_hidden holds the loss gradient w.r.t. this
/// direction's hidden rows. Returns the gradient w.r.t. the layer input and
/// accumulates the weight gradients.
inline Eigen::MatrixXd backprop_direction(const LstmDirectionWeights &w,
                                          const Eigen::MatrixXd &input,
                                          const DirectionCache &cache,
                                          const Eigen::MatrixXd &d_hidden,
                                          bool forward_dir,
                                          LstmDirectionWeights &grad) {
  const int t_count = static_cast<int>(input.rows());
  const int c_count = static_cast<int>(w.w_recurrent.cols());

  Eigen::MatrixXd z_grads = Eigen::MatrixXd::Zero(t_count, 4 * c_count);
  Eigen::VectorXd dh_next = Eigen::VectorXd::Zero(c_count);
  Eigen::VectorXd dc_next = Eigen::VectorXd::Zero(c_count);
  Eigen::VectorXd dh(c_count), dz(4 * c_count);

  for (int s = t_count - 1; s >= 0; --s) {
    const int t = forward_dir ? s : t_count - 1 - s;
    const int t_prev = forward_dir ? t - 1 : t + 1;  // valid only when s > 0
    dh = d_hidden.row(t).transpose() + dh_next;
    for (int j = 0; j < c_count; ++j) {
      const double gi = cache.gates(t, j);
      const double gf = cache.gates(t, c_count + j);
      const double gg = cache.gates(t, 2 * c_count + j);
      const double go = cache.gates(t, 3 * c_count + j);
      const double tanh_c = std::tanh(cache.cell(t, j));
      const double c_prev = (s > 0) ? cache.cell(t_prev, j) : 0.0;

      const double d_out_gate = dh(j) * tanh_c;
      const double dc = dh(j) * go * (1.0 - tanh_c * tanh_c) + dc_next(j);
      const double d_in_gate = dc * gg;
      const double d_forget = dc * c_prev;
      const double d_cand = dc * gi;
      dc_next(j) = dc * gf;

      dz(j) = d_in_gate * gi * (1.0 - gi);
      dz(c_count + j) = d_forget * gf * (1.0 - gf);
      dz(2 * c_count + j) = d_cand * (1.0 - gg * gg);
      dz(3 * c_count + j) = d_out_gate * go * (1.0 - go);
    }
    z_grads.row(t) = dz.transpose();
    dh_next.noalias() = w.w_recurrent.transpose() * dz;
  }

  // Weight gradients as whole-sequence products. h_prev rows are the hidden
  // state one step earlier in this direction's traversal order.
  Eigen::MatrixXd h_prev = Eigen::MatrixXd::Zero(t_count, c_count);
  if (t_count > 1) {
    if (forward_dir) {
      h_prev.bottomRows(t_count - 1) = cache.hidden.topRows(t_count - 1);
    } else {
      h_prev.topRows(t_count - 1) = cache.hidden.bottomRows(t_count - 1);
    }
  }
  grad.w_input.noalias() += z_grads.transpose() * input;
  grad.w_recurrent.noalias() += z_grads.transpose() * h_prev;
  grad.bias += z_grads.colwise().sum().transpose();
  return z_grads * w.w_input;
}

inline void validate_input_dim(const ModelParameters &p,
                               const Eigen::MatrixXd &input) {
  if (static_cast<int>(input.cols()) != p.input_dim) {
    throw std::invalid_argument("dimension mismatch: model wants input_dim " +
                                std::to_string(p.input_dim) + ", got " +
                                std::to_string(input.cols()));
  }
  if (input.rows() < 1) throw std::invalid_argument("empty input sequence");
}

}  // namespace detail

/// Forward pass keeping everything backward() needs. input is frames x
/// input_dim; output is frames x output_dim.
inline ForwardCache forward_with_cache(const ModelParameters &p, HeadKind head,
                                       const Eigen::MatrixXd &input) {
  detail::validate_input_dim(p, input);

  ForwardCache cache;
  cache.layers.resize(p.layers.size());
  const Eigen::MatrixXd *x = &input;
  for (std::size_t l = 0; l < p.layers.size(); ++l) {
    LayerCache &lc = cache.layers[l];
    lc.input = *x;
    lc.fwd = detail::run_direction(p.layers[l].fwd, lc.input, true);
    lc.bwd = detail::run_direction(p.layers[l].bwd, lc.input, false);
    Eigen::MatrixXd concat(lc.input.rows(), 2 * p.cell_count);
    concat.leftCols(p.cell_count) = lc.fwd.hidden;
    concat.rightCols(p.cell_count) = lc.bwd.hidden;
    cache.hidden = std::move(concat);
    x = &cache.hidden;  // safe: next iteration copies it into lc.input first
  }

  Eigen::MatrixXd pre = cache.hidden * p.head_weight.transpose();
  pre.rowwise() += p.head_bias.transpose();
  cache.output = pre.unaryExpr(head == HeadKind::kSigmoid
                                   ? +[](double v) { return detail::stable_sigmoid(v); }
                                   : +[](double v) { return detail::stable_softplus(v); });
  if (!cache.output.allFinite()) {
    throw std::runtime_error("numerical overflow: non-finite activations in forward pass");
  }
  return cache;
}

/// Per-frame model outputs; sigmoid heads land in (0,1), softplus in (0,inf).
inline Eigen::MatrixXd forward(const ModelParameters &p, HeadKind head,
                               const Eigen::MatrixXd &input) {
  return forward_with_cache(p, head, input).output;
}

/// Exact gradient of the loss w.r.t. every parameter, given the gradient at
/// the post-head output of a prior forward pass.
inline ModelParameters backward(const ModelParameters &p, HeadKind head,
                                const ForwardCache &cache,
                                const Eigen::MatrixXd &d_output) {
  if (d_output.rows() != cache.output.rows() ||
      d_output.cols() != cache.output.cols()) {
    throw std::invalid_argument("shape mismatch: output gradient vs forward cache");
  }

  ModelParameters grad = zeros_like(p);

  // Through the head activation; both derivatives only need the activation
  // value itself (sigmoid' = y(1-y), softplus' = sigmoid = 1 - exp(-y)).
  Eigen::MatrixXd d_pre(d_output.rows(), d_output.cols());
  if (head == HeadKind::kSigmoid) {
    d_pre = d_output.array() * cache.output.array() * (1.0 - cache.output.array());
  } else {
    d_pre = d_output.array() * (1.0 - (-cache.output.array()).exp());
  }

  grad.head_weight.noalias() = d_pre.transpose() * cache.hidden;
  grad.head_bias = d_pre.colwise().sum().transpose();

  Eigen::MatrixXd d_hidden = d_pre * p.head_weight;  // T x 2C
  for (int l = static_cast<int>(p.layers.size()) - 1; l >= 0; --l) {
    const LayerCache &lc = cache.layers[l];
    const int c_count = p.cell_count;
    Eigen::MatrixXd dx =
        detail::backprop_direction(p.layers[l].fwd, lc.input, lc.fwd,
                                   d_hidden.leftCols(c_count), true,
                                   grad.layers[l].fwd);
    dx += detail::backprop_direction(p.layers[l].bwd, lc.input, lc.bwd,
                                     d_hidden.rightCols(c_count), false,
                                     grad.layers[l].bwd);
    d_hidden = std::move(dx);
  }
  return grad;
}

}  // namespace sepfront
