// sepfront/dsp.hpp

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

// Deterministic signal processing front end: STFT analysis/synthesis with a
// square-root Hann window pair (exact constant-overlap-add at 50% overlap),
// magnitude extraction, triangular mel filterbank, and log compression.
// Everything here is a pure function of its inputs.

#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <stdexcept>
#include <vector>

#include "sepfront/fft.hpp"
#include "sepfront/types.hpp"

namespace sepfront {

// Fixed front-end settings. Inputs at other sample rates are rejected
// upstream; there is no resampling path.
inline constexpr int kSampleRate = 16000;
inline constexpr int kWindowLen = 512;  // 32 ms
inline constexpr int kFrameHop = 256;   // 16 ms
inline constexpr int kMelBands = 40;
inline constexpr double kMelFmin = 0.0;
inline constexpr double kMelFmax = 8000.0;
inline constexpr double kLogFloor = 1e-8;  // applied before ln

/// Square-root Hann window, w[n] = sin(pi*n/N). Used for both analysis and
/// synthesis; the product sums to exactly 1 at hop N/2.
inline std::vector<double> analysis_window(int window_len) {
  std::vector<double> w(window_len);
  for (int n = 0; n < window_len; ++n) {
    w[n] = std::sin(std::numbers::pi * n / window_len);
  }
  return w;
}

/// STFT with frames = floor((len - window_len)/hop) + 1; no padding, so only
/// fully covered frames are produced. bins = window_len/2 + 1.
inline ComplexSpectrogram stft(const Waveform &w, int window_len = kWindowLen,
                               int frame_hop = kFrameHop) {
  if (w.sample_rate <= 0) throw std::invalid_argument("sample_rate must be positive");
  if (!detail::is_power_of_two(static_cast<std::size_t>(window_len))) {
    throw std::invalid_argument("invalid window: length must be a power of two");
  }
  if (frame_hop != window_len / 2) {
    throw std::invalid_argument("invalid window: frame_hop must be window_len/2");
  }
  if (w.length() < window_len) {
    throw std::invalid_argument("signal too short: need at least one window (" +
                                std::to_string(window_len) + " samples), got " +
                                std::to_string(w.length()));
  }

  const int frames = (w.length() - window_len) / frame_hop + 1;
  const int bins = window_len / 2 + 1;
  const std::vector<double> win = analysis_window(window_len);

  ComplexSpectrogram spec;
  spec.values.resize(frames, bins);
  spec.frame_hop = frame_hop;
  spec.window_len = window_len;
  spec.sample_rate = w.sample_rate;

  std::vector<std::complex<double>> buf(window_len);
  for (int f = 0; f < frames; ++f) {
    const int offset = f * frame_hop;
    for (int n = 0; n < window_len; ++n) {
      buf[n] = std::complex<double>(win[n] * w.samples[offset + n], 0.0);
    }
    detail::fft_radix2(buf, false);
    for (int k = 0; k < bins; ++k) spec.values(f, k) = buf[k];
  }
  return spec;
}

// Divisor floor for the overlap-add envelope. Interior samples have an
// envelope of exactly 1; at the utterance edges only one frame contributes
// and the envelope decays to 0. Dividing by the raw envelope would apply an
// unbounded gain there, which turns into loud clicks when the spectrogram was
// modified (masking) and is no longer in the range of stft. The floor caps
// that gain at ~10x and costs a ~1 ms fade at each end instead.
inline constexpr double kOlaEnvelopeFloor = 1e-2;

/// Inverse STFT: per-frame inverse DFT (Hermitian extension of the half
/// spectrum), synthesis windowing, overlap-add, then division by the
/// accumulated squared-window envelope (floored, see above). For spectrograms
/// produced by stft() this reconstructs the signal exactly wherever the
/// envelope clears the floor; samples past the last frame's coverage come out
/// as zeros.
inline Waveform istft(const ComplexSpectrogram &spec, int out_len) {
  if (!detail::is_power_of_two(static_cast<std::size_t>(spec.window_len)) ||
      spec.frame_hop != spec.window_len / 2) {
    throw std::invalid_argument("COLA violated: window/hop pair " +
                                std::to_string(spec.window_len) + "/" +
                                std::to_string(spec.frame_hop) +
                                " is not the supported sqrt-Hann 50% overlap");
  }
  if (spec.bins() != spec.window_len / 2 + 1) {
    throw std::invalid_argument("COLA violated: bins inconsistent with window length");
  }
  if (spec.frames() < 1) throw std::invalid_argument("empty spectrogram");
  if (out_len < 0) throw std::invalid_argument("negative output length");

  const int window_len = spec.window_len;
  const int bins = spec.bins();
  const std::vector<double> win = analysis_window(window_len);

  Waveform out;
  out.sample_rate = spec.sample_rate;
  out.samples.assign(static_cast<std::size_t>(out_len), 0.0);
  std::vector<double> window_sq_sum(static_cast<std::size_t>(out_len), 0.0);

  std::vector<std::complex<double>> buf(window_len);
  for (int f = 0; f < spec.frames(); ++f) {
    for (int k = 0; k < bins; ++k) buf[k] = spec.values(f, k);
    for (int k = bins; k < window_len; ++k) {
      buf[k] = std::conj(spec.values(f, window_len - k));
    }
    detail::fft_radix2(buf, true);

    const int offset = f * spec.frame_hop;
    for (int n = 0; n < window_len; ++n) {
      const int i = offset + n;
      if (i >= out_len) break;
      out.samples[i] += win[n] * buf[n].real();
      window_sq_sum[i] += win[n] * win[n];
    }
  }
  for (int i = 0; i < out_len; ++i) {
    out.samples[i] /= std::max(window_sq_sum[i], kOlaEnvelopeFloor);
  }
  return out;
}

/// Elementwise complex modulus; result is tagged fft.
inline FeatureMatrix magnitude(const ComplexSpectrogram &spec) {
  FeatureMatrix f;
  f.values = spec.values.cwiseAbs();
  f.domain = Domain::kFft;
  f.frame_hop = spec.frame_hop;
  f.window_len = spec.window_len;
  f.sample_rate = spec.sample_rate;
  f.mel_bands = 0;
  return f;
}

inline double hz_to_mel(double hz) {
  return 2595.0 * std::log10(1.0 + hz / 700.0);
}

inline double mel_to_hz(double mel) {
  return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0);
}

/// Triangular mel filterbank with unit-peak (area-unnormalized) filters.
/// Band centers are uniform in mel between fmin and fmax; each filter spans
/// the centers of its two neighbours only.
inline MelFilterbank make_mel_filterbank(int bands, int sample_rate, double fmin,
                                         double fmax, int bins) {
  if (bands < 1 || bins < 2) throw std::invalid_argument("bad filterbank shape");
  if (!(fmin >= 0.0 && fmax > fmin && fmax <= sample_rate / 2.0)) {
    throw std::invalid_argument("bad filterbank frequency range");
  }
  const int window_len = 2 * (bins - 1);
  const double hz_per_bin = static_cast<double>(sample_rate) / window_len;

  std::vector<double> edge_hz(bands + 2);
  const double mel_lo = hz_to_mel(fmin), mel_hi = hz_to_mel(fmax);
  for (int j = 0; j < bands + 2; ++j) {
    edge_hz[j] = mel_to_hz(mel_lo + (mel_hi - mel_lo) * j / (bands + 1));
  }

  MelFilterbank bank;
  bank.weights = Eigen::MatrixXd::Zero(bands, bins);
  bank.sample_rate = sample_rate;
  bank.fmin = fmin;
  bank.fmax = fmax;

  for (int b = 0; b < bands; ++b) {
    const double lower = edge_hz[b], center = edge_hz[b + 1], upper = edge_hz[b + 2];
    for (int k = 0; k < bins; ++k) {
      const double f = k * hz_per_bin;
      double w = 0.0;
      if (f >= lower && f <= center && center > lower) {
        w = (f - lower) / (center - lower);
      } else if (f > center && f <= upper && upper > center) {
        w = (upper - f) / (upper - center);
      }
      bank.weights(b, k) = w;
    }
    if (bank.weights.row(b).maxCoeff() <= 0.0) {
      throw std::runtime_error("mel filterbank band " + std::to_string(b) +
                               " covers no FFT bin; use fewer bands");
    }
  }
  return bank;
}

/// The toolkit's fixed 40-band filterbank for 257-bin spectra.
inline const MelFilterbank &default_filterbank() {
  static const MelFilterbank bank = make_mel_filterbank(
      kMelBands, kSampleRate, kMelFmin, kMelFmax, kWindowLen / 2 + 1);
  return bank;
}

/// fft -> fbank: values * weights^T. Linear, nonnegativity preserving.
inline FeatureMatrix apply_mel(const FeatureMatrix &f, const MelFilterbank &bank) {
  if (f.domain != Domain::kFft) {
    throw std::invalid_argument("domain mismatch: apply_mel wants fft input, got " +
                                domain_name(f.domain));
  }
  if (f.dims() != bank.bins()) {
    throw std::invalid_argument("dimension mismatch: " + std::to_string(f.dims()) +
                                " bins vs filterbank " + std::to_string(bank.bins()));
  }
  FeatureMatrix out;
  out.values = f.values * bank.weights.transpose();
  out.domain = Domain::kFbank;
  out.frame_hop = f.frame_hop;
  out.window_len = f.window_len;
  out.sample_rate = f.sample_rate;
  out.mel_bands = bank.bands();
  return out;
}

/// ln(max(v, kLogFloor)) elementwise; fft -> log-fft, fbank -> log-fbank.
inline FeatureMatrix to_log(const FeatureMatrix &f) {
  if (is_log_domain(f.domain)) {
    throw std::invalid_argument("domain mismatch: " + domain_name(f.domain) +
                                " is already logarithmic");
  }
  FeatureMatrix out = f;
  out.values = f.values.cwiseMax(kLogFloor).array().log().matrix();
  out.domain = log_of(f.domain);
  return out;
}

/// exp(v) elementwise; log-fft -> fft, log-fbank -> fbank.
inline FeatureMatrix to_linear(const FeatureMatrix &f) {
  if (!is_log_domain(f.domain)) {
    throw std::invalid_argument("domain mismatch: " + domain_name(f.domain) +
                                " is already linear");
  }
  FeatureMatrix out = f;
  out.values = f.values.array().exp().matrix();
  out.domain = linear_of(f.domain);
  return out;
}

/// Waveform -> features in any of the four domains, via the fixed front end.
inline FeatureMatrix extract_features(const Waveform &w, Domain domain) {
  if (w.sample_rate != kSampleRate) {
    throw std::invalid_argument("unsupported sample rate " +
                                std::to_string(w.sample_rate) +
                                " (front end is fixed at 16 kHz)");
  }
  FeatureMatrix f = magnitude(stft(w));
  if (is_fbank_domain(domain)) f = apply_mel(f, default_filterbank());
  if (is_log_domain(domain)) f = to_log(f);
  return f;
}

}  // namespace sepfront
