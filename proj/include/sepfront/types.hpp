// sepfront/types.hpp

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

#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace sepfront {

/// The four time-frequency representations features can live in.
enum class Domain : std::uint8_t {
  kFft = 0,       // magnitude spectrogram
  kLogFft = 1,    // log magnitude spectrogram
  kFbank = 2,     // mel filterbank magnitudes
  kLogFbank = 3,  // log mel filterbank magnitudes
};

inline bool is_log_domain(Domain d) {
  return d == Domain::kLogFft || d == Domain::kLogFbank;
}

inline bool is_fbank_domain(Domain d) {
  return d == Domain::kFbank || d == Domain::kLogFbank;
}

inline std::string domain_name(Domain d) {
  switch (d) {
    case Domain::kFft: return "fft";
    case Domain::kLogFft: return "log-fft";
    case Domain::kFbank: return "fbank";
    case Domain::kLogFbank: return "log-fbank";
  }
  throw std::logic_error("unknown domain code");
}

inline Domain domain_from_name(const std::string &name) {
  if (name == "fft") return Domain::kFft;
  if (name == "log-fft") return Domain::kLogFft;
  if (name == "fbank") return Domain::kFbank;
  if (name == "log-fbank") return Domain::kLogFbank;
  throw std::invalid_argument("unknown domain name: \"" + name +
                              "\" (expected fft, log-fft, fbank, log-fbank)");
}

inline Domain domain_from_code(std::uint8_t code) {
  if (code > 3) throw std::invalid_argument("unknown domain code");
  return static_cast<Domain>(code);
}

/// Logarithmic counterpart of a linear domain (fft -> log-fft, fbank -> log-fbank).
inline Domain log_of(Domain d) {
  if (d == Domain::kFft) return Domain::kLogFft;
  if (d == Domain::kFbank) return Domain::kLogFbank;
  throw std::invalid_argument("domain mismatch: " + domain_name(d) +
                              " is already logarithmic");
}

/// Linear counterpart of a logarithmic domain.
inline Domain linear_of(Domain d) {
  if (d == Domain::kLogFft) return Domain::kFft;
  if (d == Domain::kLogFbank) return Domain::kFbank;
  throw std::invalid_argument("domain mismatch: " + domain_name(d) +
                              " is already linear");
}

/// Mono PCM signal. Samples are dimensionless amplitudes, nominal range [-1, 1].
struct Waveform {
  std::vector<double> samples;
  int sample_rate = 0;  // Hz

  int length() const { return static_cast<int>(samples.size()); }
};

/// Complex STFT, frames x bins. Carries the phase needed for resynthesis.
struct ComplexSpectrogram {
  Eigen::MatrixXcd values;  // frames x bins
  int frame_hop = 0;        // samples
  int window_len = 0;       // samples
  int sample_rate = 0;      // Hz

  int frames() const { return static_cast<int>(values.rows()); }
  int bins() const { return static_cast<int>(values.cols()); }
};

/// Real frames x dims matrix tagged with the domain it lives in.
///
/// mel_bands is nonzero exactly for the fbank-family domains, where it equals
/// the number of columns.
struct FeatureMatrix {
  Eigen::MatrixXd values;  // frames x dims
  Domain domain = Domain::kFft;
  int frame_hop = 0;
  int window_len = 0;
  int sample_rate = 0;
  int mel_bands = 0;

  int frames() const { return static_cast<int>(values.rows()); }
  int dims() const { return static_cast<int>(values.cols()); }
};

/// Triangular mel filterbank; weights is bands x bins, every entry >= 0.
struct MelFilterbank {
  Eigen::MatrixXd weights;  // bands x bins
  int sample_rate = 0;
  double fmin = 0.0;  // Hz
  double fmax = 0.0;  // Hz

  int bands() const { return static_cast<int>(weights.rows()); }
  int bins() const { return static_cast<int>(weights.cols()); }
};

}  // namespace sepfront
