// sepfront/checkpoint.hpp

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

// SEPF model checkpoint container.
//
//   magic "SEPF" | u32 version (=1)
//   u32 layer_count, cell_count, input_dim, output_dim
//   u8 head_kind (0 sigmoid, 1 softplus)
//   u8 input_domain, u8 output_domain   (0 fft, 1 log-fft, 2 fbank, 3 log-fbank)
//   u8 objective (0 masking, 1 mapping, 2 signal-approximation)
//   u32 sample_rate, window_len, frame_hop, mel_bands
//   u8 has_output_norm
//   f32 input_mean[input_dim], f32 input_std[input_dim]
//   [f32 output_offset[output_dim], f32 output_scale[output_dim]]
//   parameter tensors, little-endian f32, row-major, in for_each_tensor order
//
// All multi-byte values are little-endian.

#pragma once

#include <Eigen/Dense>
#include <fstream>
#include <stdexcept>
#include <string>

#include "sepfront/binary_io.hpp"
#include "sepfront/lstm.hpp"
#include "sepfront/method.hpp"

namespace sepfront {

/// A trained model plus everything inference needs: the method row, the
/// front-end geometry it was trained under, and the feature normalization
/// statistics gathered from its training split.
struct Checkpoint {
  ModelParameters params;
  HeadKind head = HeadKind::kSigmoid;
  MethodConfig method;

  int sample_rate = kSampleRate;
  int window_len = kWindowLen;
  int frame_hop = kFrameHop;
  int mel_bands = kMelBands;

  // Input features are standardized per dimension before the net sees them.
  Eigen::VectorXd input_mean;  // input_dim
  Eigen::VectorXd input_std;   // input_dim, strictly positive

  // Mapping heads predict (target - offset) / scale; empty for mask heads.
  Eigen::VectorXd output_offset;  // output_dim or empty
  Eigen::VectorXd output_scale;   // output_dim or empty

  bool has_output_norm() const { return output_offset.size() > 0; }
};

inline void save_checkpoint(const std::string &path, const Checkpoint &ck) {
  if (ck.input_mean.size() != ck.params.input_dim ||
      ck.input_std.size() != ck.params.input_dim) {
    throw std::invalid_argument("checkpoint input stats sized " +
                                std::to_string(ck.input_mean.size()) +
                                " but input_dim is " +
                                std::to_string(ck.params.input_dim));
  }
  if (ck.has_output_norm() &&
      (ck.output_offset.size() != ck.params.output_dim ||
       ck.output_scale.size() != ck.params.output_dim)) {
    throw std::invalid_argument("checkpoint output stats mismatch output_dim");
  }
  // Must be one of the supported rows.
  method_from_triple(ck.method.input_domain, ck.method.output_domain,
                     ck.method.objective);

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write checkpoint: " + path);

  detail::write_magic(out, "SEPF");
  detail::write_u32(out, 1);
  detail::write_u32(out, static_cast<std::uint32_t>(ck.params.layer_count));
  detail::write_u32(out, static_cast<std::uint32_t>(ck.params.cell_count));
  detail::write_u32(out, static_cast<std::uint32_t>(ck.params.input_dim));
  detail::write_u32(out, static_cast<std::uint32_t>(ck.params.output_dim));
  detail::write_u8(out, static_cast<std::uint8_t>(ck.head));
  detail::write_u8(out, static_cast<std::uint8_t>(ck.method.input_domain));
  detail::write_u8(out, static_cast<std::uint8_t>(ck.method.output_domain));
  detail::write_u8(out, static_cast<std::uint8_t>(ck.method.objective));
  detail::write_u32(out, static_cast<std::uint32_t>(ck.sample_rate));
  detail::write_u32(out, static_cast<std::uint32_t>(ck.window_len));
  detail::write_u32(out, static_cast<std::uint32_t>(ck.frame_hop));
  detail::write_u32(out, static_cast<std::uint32_t>(ck.mel_bands));
  detail::write_u8(out, ck.has_output_norm() ? 1 : 0);

  detail::write_matrix_f32(out, ck.input_mean);
  detail::write_matrix_f32(out, ck.input_std);
  if (ck.has_output_norm()) {
    detail::write_matrix_f32(out, ck.output_offset);
    detail::write_matrix_f32(out, ck.output_scale);
  }
  for_each_tensor(const_cast<ModelParameters &>(ck.params),
                  [&out](auto &t) { detail::write_matrix_f32(out, t); });
  if (!out) throw std::runtime_error("failed writing checkpoint: " + path);
}

inline Checkpoint load_checkpoint(const std::string &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open checkpoint: " + path);

  detail::expect_magic(in, "SEPF", "SEPF checkpoint");
  const std::uint32_t version = detail::read_u32(in);
  if (version != 1) {
    throw std::runtime_error("unsupported SEPF version " + std::to_string(version));
  }

  Checkpoint ck;
  const int layer_count = static_cast<int>(detail::read_u32(in));
  const int cell_count = static_cast<int>(detail::read_u32(in));
  const int input_dim = static_cast<int>(detail::read_u32(in));
  const int output_dim = static_cast<int>(detail::read_u32(in));
  const std::uint8_t head = detail::read_u8(in);
  if (head > 1) throw std::runtime_error("bad head kind in checkpoint");
  ck.head = static_cast<HeadKind>(head);
  const Domain in_dom = domain_from_code(detail::read_u8(in));
  const Domain out_dom = domain_from_code(detail::read_u8(in));
  const Objective objective = objective_from_code(detail::read_u8(in));
  ck.method = method_from_triple(in_dom, out_dom, objective);
  ck.sample_rate = static_cast<int>(detail::read_u32(in));
  ck.window_len = static_cast<int>(detail::read_u32(in));
  ck.frame_hop = static_cast<int>(detail::read_u32(in));
  ck.mel_bands = static_cast<int>(detail::read_u32(in));
  const bool has_output_norm = detail::read_u8(in) != 0;

  if (layer_count < 1 || cell_count < 1 || input_dim < 1 || output_dim < 1) {
    throw std::runtime_error("bad architecture header in checkpoint");
  }

  ck.input_mean.resize(input_dim);
  ck.input_std.resize(input_dim);
  detail::read_matrix_f32(in, ck.input_mean);
  detail::read_matrix_f32(in, ck.input_std);
  if (has_output_norm) {
    ck.output_offset.resize(output_dim);
    ck.output_scale.resize(output_dim);
    detail::read_matrix_f32(in, ck.output_offset);
    detail::read_matrix_f32(in, ck.output_scale);
  }

  // Allocate the parameter tensors, then fill them in the fixed order.
  ck.params.layer_count = layer_count;
  ck.params.cell_count = cell_count;
  ck.params.input_dim = input_dim;
  ck.params.output_dim = output_dim;
  ck.params.layers.resize(layer_count);
  for (int l = 0; l < layer_count; ++l) {
    const int d_in = (l == 0) ? input_dim : 2 * cell_count;
    for (LstmDirectionWeights *dir :
         {&ck.params.layers[l].fwd, &ck.params.layers[l].bwd}) {
      dir->w_input.resize(4 * cell_count, d_in);
      dir->w_recurrent.resize(4 * cell_count, cell_count);
      dir->bias.resize(4 * cell_count);
    }
  }
  ck.params.head_weight.resize(output_dim, 2 * cell_count);
  ck.params.head_bias.resize(output_dim);
  for_each_tensor(ck.params, [&in](auto &t) { detail::read_matrix_f32(in, t); });

  if (!all_finite(ck.params)) {
    throw std::runtime_error("checkpoint holds non-finite parameters: " + path);
  }
  return ck;
}

}  // namespace sepfront
