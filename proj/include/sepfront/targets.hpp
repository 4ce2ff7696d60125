// sepfront/targets.hpp

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

// Supervised training target construction for every supported method row:
// clipped direct masks for the masking objective, clean features for mapping
// and signal approximation.

#pragma once

#include <stdexcept>
#include <string>

#include "sepfront/dsp.hpp"
#include "sepfront/method.hpp"
#include "sepfront/types.hpp"

namespace sepfront {

namespace detail {

inline void require_same_shape_and_domain(const FeatureMatrix &a,
                                          const FeatureMatrix &b,
                                          const char *what) {
  if (a.domain != b.domain) {
    throw std::invalid_argument(std::string(what) + ": domain mismatch (" +
                                domain_name(a.domain) + " vs " +
                                domain_name(b.domain) + ")");
  }
  if (a.frames() != b.frames() || a.dims() != b.dims()) {
    throw std::invalid_argument(std::string(what) + ": shape mismatch (" +
                                std::to_string(a.frames()) + "x" +
                                std::to_string(a.dims()) + " vs " +
                                std::to_string(b.frames()) + "x" +
                                std::to_string(b.dims()) + ")");
  }
}

}  // namespace detail

/// Per-cell ratio of clean to noisy values, clipped to [0, 1]. Cells with a
/// zero denominator become 0 when the clean value is also zero and 1
/// otherwise (speech present, the noisy representation of it vanished).
/// Applies verbatim in every domain, including the logarithmic ones, where
/// the raw ratio of log values may fall outside [0, 1] before clipping.
inline FeatureMatrix direct_mask(const FeatureMatrix &clean,
                                 const FeatureMatrix &noisy) {
  detail::require_same_shape_and_domain(clean, noisy, "direct_mask");
  FeatureMatrix mask = noisy;
  for (int t = 0; t < clean.frames(); ++t) {
    for (int d = 0; d < clean.dims(); ++d) {
      const double s = clean.values(t, d);
      const double y = noisy.values(t, d);
      double m;
      if (y == 0.0) {
        m = (s == 0.0) ? 0.0 : 1.0;
      } else {
        m = s / y;
        if (m < 0.0) m = 0.0;
        if (m > 1.0) m = 1.0;
      }
      mask.values(t, d) = m;
    }
  }
  return mask;
}

/// Model input plus supervision target for one utterance under one method.
/// For the masking objective the target holds mask values in [0, 1]; for
/// mapping and signal approximation it holds the clean features in the
/// method's output domain (the mask stays implicit for SA).
struct TrainingPair {
  FeatureMatrix input;   // noisy features, input domain, unnormalized
  FeatureMatrix target;  // mask or clean features, output domain
  MethodConfig config;
};

inline TrainingPair build_training_pair(const Waveform &clean_wav,
                                        const Waveform &noisy_wav,
                                        const MethodConfig &config) {
  if (clean_wav.length() != noisy_wav.length() ||
      clean_wav.sample_rate != noisy_wav.sample_rate) {
    throw std::invalid_argument(
        "build_training_pair: clean and noisy waveforms must match in length "
        "and sample rate");
  }
  // Reject triples outside the supported rows even if the struct was
  // assembled by hand.
  method_from_triple(config.input_domain, config.output_domain, config.objective);

  TrainingPair pair;
  pair.config = config;
  pair.input = extract_features(noisy_wav, config.input_domain);
  FeatureMatrix clean_out = extract_features(clean_wav, config.output_domain);
  if (config.objective == Objective::kMasking) {
    FeatureMatrix noisy_out = extract_features(noisy_wav, config.output_domain);
    pair.target = direct_mask(clean_out, noisy_out);
  } else {
    pair.target = std::move(clean_out);
  }
  return pair;
}

}  // namespace sepfront
