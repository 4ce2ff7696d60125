// sepfront/enhance.hpp

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

// Inference: run a trained model on a noisy utterance, realize the estimated
// clean representation per objective and domain, and optionally resynthesize
// a waveform from the estimated magnitudes and the noisy phases. Also the
// SEPX enhanced-feature dump:
//
//   magic "SEPX" | u8 domain | u32 frame_hop, window_len, sample_rate
//   u32 frames, dims | f32 data, row-major by frame, little-endian

#pragma once

#include <complex>
#include <fstream>
#include <stdexcept>
#include <string>

#include "sepfront/checkpoint.hpp"
#include "sepfront/dsp.hpp"
#include "sepfront/loss.hpp"
#include "sepfront/targets.hpp"
#include "sepfront/wav.hpp"

namespace sepfront {

namespace detail {

inline void require_front_end_match(const Checkpoint &ck) {
  if (ck.sample_rate != kSampleRate || ck.window_len != kWindowLen ||
      ck.frame_hop != kFrameHop ||
      (is_fbank_domain(ck.method.output_domain) && ck.mel_bands != kMelBands) ||
      (is_fbank_domain(ck.method.input_domain) && ck.mel_bands != kMelBands)) {
    throw std::runtime_error(
        "architecture mismatch: checkpoint front-end geometry differs from "
        "this build's fixed front end");
  }
  if (ck.params.input_dim != domain_dims(ck.method.input_domain) ||
      ck.params.output_dim != domain_dims(ck.method.output_domain)) {
    throw std::runtime_error(
        "architecture mismatch: checkpoint dimensions do not fit its method "
        "domains");
  }
  if (ck.method.objective == Objective::kMapping && !ck.has_output_norm()) {
    throw std::runtime_error(
        "architecture mismatch: mapping checkpoint lacks output statistics");
  }
}

}  // namespace detail

/// Predicted head activations (mask values or normalized mapping outputs)
/// for one utterance's worth of input-domain features.
inline Eigen::MatrixXd predict_activations(const Checkpoint &ck,
                                           const FeatureMatrix &input) {
  if (input.domain != ck.method.input_domain) {
    throw std::invalid_argument("domain mismatch: checkpoint wants " +
                                domain_name(ck.method.input_domain) +
                                " input, got " + domain_name(input.domain));
  }
  const Eigen::MatrixXd x =
      (input.values.rowwise() - ck.input_mean.transpose()).array().rowwise() /
      ck.input_std.transpose().array();
  return forward(ck.params, ck.head, x);
}

/// Applies a [0,1] gain matrix to noisy output-domain features. Exposed
/// separately so a forced mask (all ones, an oracle mask) can be pushed
/// through the exact inference path.
inline FeatureMatrix apply_mask(const FeatureMatrix &noisy_features,
                                const Eigen::MatrixXd &mask) {
  detail::require_same_matrix_shape(noisy_features.values, mask,
                                    "apply_mask: features vs mask");
  FeatureMatrix out = noisy_features;
  out.values = noisy_features.values.cwiseProduct(mask);
  return out;
}

/// Full inference to the method's output domain. Masking and SA heads gate
/// the noisy output-domain features; mapping heads are de-normalized with the
/// checkpoint's stored output statistics.
inline FeatureMatrix enhance_features(const Checkpoint &ck, const Waveform &noisy) {
  detail::require_front_end_match(ck);
  const FeatureMatrix input = extract_features(noisy, ck.method.input_domain);
  const Eigen::MatrixXd activations = predict_activations(ck, input);

  if (ck.method.objective == Objective::kMapping) {
    FeatureMatrix estimate;
    estimate.values =
        (activations.array().rowwise() * ck.output_scale.transpose().array())
            .rowwise() +
        ck.output_offset.transpose().array();
    estimate.domain = ck.method.output_domain;
    estimate.frame_hop = input.frame_hop;
    estimate.window_len = input.window_len;
    estimate.sample_rate = input.sample_rate;
    estimate.mel_bands = is_fbank_domain(estimate.domain) ? ck.mel_bands : 0;
    return estimate;
  }
  const FeatureMatrix noisy_out = extract_features(noisy, ck.method.output_domain);
  return apply_mask(noisy_out, activations);
}

/// Builds a complex spectrogram from estimated magnitudes and the noisy
/// phases, then inverts it. log-fft estimates are exponentiated first;
/// mel-domain estimates are rejected (the filterbank is not invertible).
inline Waveform resynthesize(const FeatureMatrix &estimate,
                             const ComplexSpectrogram &noisy_spec, int out_len) {
  if (is_fbank_domain(estimate.domain)) {
    throw std::invalid_argument(
        "not invertible: " + domain_name(estimate.domain) +
        " estimates cannot be resynthesized (mel filterbank discards bins)");
  }
  const FeatureMatrix mag =
      is_log_domain(estimate.domain) ? to_linear(estimate) : estimate;
  if (mag.frames() != noisy_spec.frames() || mag.dims() != noisy_spec.bins()) {
    throw std::invalid_argument("shape mismatch: estimate " +
                                std::to_string(mag.frames()) + "x" +
                                std::to_string(mag.dims()) + " vs spectrogram " +
                                std::to_string(noisy_spec.frames()) + "x" +
                                std::to_string(noisy_spec.bins()));
  }

  ComplexSpectrogram out = noisy_spec;
  for (int t = 0; t < out.frames(); ++t) {
    for (int k = 0; k < out.bins(); ++k) {
      const std::complex<double> v = noisy_spec.values(t, k);
      const double a = std::abs(v);
      out.values(t, k) = (a > 0.0) ? v * (mag.values(t, k) / a)
                                   : std::complex<double>(mag.values(t, k), 0.0);
    }
  }
  return istft(out, out_len);
}

/// Converts an output-domain estimate to log-fbank along the feature path.
inline FeatureMatrix to_asr_features(const FeatureMatrix &estimate) {
  switch (estimate.domain) {
    case Domain::kLogFbank:
      return estimate;
    case Domain::kFbank:
      return to_log(estimate);
    case Domain::kFft:
      return to_log(apply_mel(estimate, default_filterbank()));
    case Domain::kLogFft:
      return to_log(apply_mel(to_linear(estimate), default_filterbank()));
  }
  throw std::logic_error("unknown domain");
}

/// log-fbank features for a downstream recognizer. With via_waveform the
/// estimate is first rendered to a waveform with the noisy phases and the
/// features are recomputed from it; without, the estimate is converted along
/// the feature path. The waveform detour only exists for invertible domains.
inline FeatureMatrix enhance_to_asr_features(const Checkpoint &ck,
                                             const Waveform &noisy,
                                             bool via_waveform) {
  const FeatureMatrix estimate = enhance_features(ck, noisy);
  if (!via_waveform) return to_asr_features(estimate);
  if (is_fbank_domain(estimate.domain)) {
    throw std::invalid_argument(
        "not invertible: the \"" + ck.method.name +
        "\" method estimates in " + domain_name(estimate.domain) +
        ", which has no waveform path");
  }
  const Waveform rendered =
      resynthesize(estimate, stft(noisy), noisy.length());
  return extract_features(rendered, Domain::kLogFbank);
}

/// SEPX enhanced-feature dump.
inline void write_feature_dump(const std::string &path, const FeatureMatrix &f) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write feature dump: " + path);
  detail::write_magic(out, "SEPX");
  detail::write_u8(out, static_cast<std::uint8_t>(f.domain));
  detail::write_u32(out, static_cast<std::uint32_t>(f.frame_hop));
  detail::write_u32(out, static_cast<std::uint32_t>(f.window_len));
  detail::write_u32(out, static_cast<std::uint32_t>(f.sample_rate));
  detail::write_u32(out, static_cast<std::uint32_t>(f.frames()));
  detail::write_u32(out, static_cast<std::uint32_t>(f.dims()));
  detail::write_matrix_f32(out, f.values);
  if (!out) throw std::runtime_error("failed writing feature dump: " + path);
}

inline FeatureMatrix read_feature_dump(const std::string &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open feature dump: " + path);
  detail::expect_magic(in, "SEPX", "SEPX feature dump");
  FeatureMatrix f;
  f.domain = domain_from_code(detail::read_u8(in));
  f.frame_hop = static_cast<int>(detail::read_u32(in));
  f.window_len = static_cast<int>(detail::read_u32(in));
  f.sample_rate = static_cast<int>(detail::read_u32(in));
  const int frames = static_cast<int>(detail::read_u32(in));
  const int dims = static_cast<int>(detail::read_u32(in));
  if (frames < 1 || dims < 1) throw std::runtime_error("empty feature dump: " + path);
  f.values.resize(frames, dims);
  detail::read_matrix_f32(in, f.values);
  f.mel_bands = is_fbank_domain(f.domain) ? dims : 0;
  return f;
}

}  // namespace sepfront
