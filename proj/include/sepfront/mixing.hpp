// sepfront/mixing.hpp

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

// SNR-controlled additive mixing and the line-oriented mixture manifest:
// clean_path<TAB>noise_path<TAB>snr_db<TAB>seed[<TAB>condition]

#pragma once

#include <cmath>
#include <cstdint>
#include <fstream>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "sepfront/types.hpp"

namespace sepfront {

/// One mixture to synthesize: a clean utterance, a noise recording, a target
/// SNR, and a seed that picks the noise segment offset. The optional
/// condition label ("matched" or "unseen") tags evaluation mixtures.
struct MixtureSpec {
  std::string clean_path;
  std::string noise_path;
  double snr_db = 0.0;
  std::uint64_t seed = 0;
  std::string condition = "matched";
};

struct MixResult {
  Waveform noisy;
  Waveform scaled_noise;  // exactly the component added to the clean signal
};

inline double mean_power(const Waveform &w) {
  double acc = 0.0;
  for (double s : w.samples) acc += s * s;
  return w.samples.empty() ? 0.0 : acc / static_cast<double>(w.samples.size());
}

/// Adds a seed-selected noise segment to the clean signal, scaled so that
/// 10*log10(P_clean / P_noise) hits snr_db exactly, with P the mean squared
/// amplitude over the clean utterance's length. No clipping happens here;
/// that is deferred to the final WAV write.
inline MixResult mix_at_snr(const Waveform &clean, const Waveform &noise,
                            double snr_db, std::uint64_t seed) {
  if (clean.sample_rate != noise.sample_rate) {
    throw std::invalid_argument("mix_at_snr: sample rates differ");
  }
  if (noise.length() < clean.length()) {
    throw std::invalid_argument("mix_at_snr: noise too short (" +
                                std::to_string(noise.length()) + " < " +
                                std::to_string(clean.length()) + " samples)");
  }
  const double p_clean = mean_power(clean);
  if (p_clean <= 0.0) {
    throw std::invalid_argument("degenerate source: clean utterance is silent");
  }

  std::mt19937_64 rng(seed);
  const std::uint64_t span =
      static_cast<std::uint64_t>(noise.length() - clean.length()) + 1;
  const std::size_t offset = static_cast<std::size_t>(rng() % span);

  double p_noise = 0.0;
  for (int i = 0; i < clean.length(); ++i) {
    const double v = noise.samples[offset + i];
    p_noise += v * v;
  }
  p_noise /= static_cast<double>(clean.length());
  if (p_noise <= 0.0) {
    throw std::invalid_argument("degenerate source: selected noise segment is silent");
  }

  // P_clean / (scale^2 * P_noise) = 10^(snr/10)
  const double scale = std::sqrt(p_clean / (p_noise * std::pow(10.0, snr_db / 10.0)));

  MixResult out;
  out.scaled_noise.sample_rate = clean.sample_rate;
  out.scaled_noise.samples.resize(clean.samples.size());
  out.noisy.sample_rate = clean.sample_rate;
  out.noisy.samples.resize(clean.samples.size());
  for (int i = 0; i < clean.length(); ++i) {
    const double n = scale * noise.samples[offset + i];
    out.scaled_noise.samples[i] = n;
    out.noisy.samples[i] = clean.samples[i] + n;
  }
  return out;
}

/// Achieved SNR of a (clean, scaled_noise) pair, in dB.
inline double measured_snr_db(const Waveform &clean, const Waveform &scaled_noise) {
  const double p_clean = mean_power(clean);
  const double p_noise = mean_power(scaled_noise);
  if (p_clean <= 0.0 || p_noise <= 0.0) {
    throw std::invalid_argument("measured_snr_db: silent signal");
  }
  return 10.0 * std::log10(p_clean / p_noise);
}

/// Parses a mixture manifest. Blank lines and lines starting with '#' are
/// skipped. Throws "empty manifest" when nothing remains.
inline std::vector<MixtureSpec> read_manifest(const std::string &path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open manifest: " + path);

  std::vector<MixtureSpec> specs;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    std::vector<std::string> fields;
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, '\t')) fields.push_back(field);
    if (fields.size() < 4 || fields.size() > 5) {
      throw std::runtime_error(path + ":" + std::to_string(line_no) +
                               ": expected 4 or 5 tab-separated fields, got " +
                               std::to_string(fields.size()));
    }
    MixtureSpec spec;
    spec.clean_path = fields[0];
    spec.noise_path = fields[1];
    try {
      spec.snr_db = std::stod(fields[2]);
      spec.seed = static_cast<std::uint64_t>(std::stoull(fields[3]));
    } catch (const std::exception &) {
      throw std::runtime_error(path + ":" + std::to_string(line_no) +
                               ": malformed snr_db/seed field");
    }
    if (fields.size() == 5) {
      if (fields[4] != "matched" && fields[4] != "unseen") {
        throw std::runtime_error(path + ":" + std::to_string(line_no) +
                                 ": condition must be \"matched\" or \"unseen\"");
      }
      spec.condition = fields[4];
    }
    specs.push_back(std::move(spec));
  }
  if (specs.empty()) throw std::runtime_error("empty manifest: " + path);
  return specs;
}

}  // namespace sepfront
