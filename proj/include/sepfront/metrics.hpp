// sepfront/metrics.hpp

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

// Desk-scale proxy metrics: feature-domain MSE and scale-invariant SDR.

#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "sepfront/loss.hpp"
#include "sepfront/types.hpp"

namespace sepfront {

/// SI-SDR values are reported inside [-kSiSdrCapDb, +kSiSdrCapDb]; a perfect
/// (zero-distortion) match lands exactly on the cap.
inline constexpr double kSiSdrCapDb = 100.0;

/// Mean per-frame squared 2-norm of the difference, same normalization as
/// the training loss.
inline double feature_mse(const FeatureMatrix &estimate, const FeatureMatrix &clean) {
  detail::require_same_shape_and_domain(estimate, clean, "feature_mse");
  return squared_loss(estimate.values, clean.values);
}

/// Scale-invariant SDR in dB: the estimate is compared against its own
/// projection onto the reference, so si_sdr(c * e, r) == si_sdr(e, r) for any
/// c > 0.
inline double si_sdr(const Waveform &estimate, const Waveform &reference) {
  if (estimate.length() != reference.length()) {
    throw std::invalid_argument("si_sdr: length mismatch (" +
                                std::to_string(estimate.length()) + " vs " +
                                std::to_string(reference.length()) + ")");
  }
  double ref_energy = 0.0, cross = 0.0;
  for (int i = 0; i < reference.length(); ++i) {
    ref_energy += reference.samples[i] * reference.samples[i];
    cross += estimate.samples[i] * reference.samples[i];
  }
  if (ref_energy <= 0.0) {
    throw std::invalid_argument("si_sdr: silent reference");
  }
  const double alpha = cross / ref_energy;
  const double target_energy = alpha * alpha * ref_energy;
  double distortion = 0.0;
  for (int i = 0; i < reference.length(); ++i) {
    const double d = alpha * reference.samples[i] - estimate.samples[i];
    distortion += d * d;
  }
  if (distortion <= 0.0) return kSiSdrCapDb;
  if (target_energy <= 0.0) return -kSiSdrCapDb;
  const double value = 10.0 * std::log10(target_energy / distortion);
  return std::clamp(value, -kSiSdrCapDb, kSiSdrCapDb);
}

}  // namespace sepfront
