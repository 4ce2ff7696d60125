// sepfront/method.hpp

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

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "sepfront/dsp.hpp"
#include "sepfront/lstm.hpp"
#include "sepfront/types.hpp"

namespace sepfront {

enum class Objective : std::uint8_t {
  kMasking = 0,              // predict a [0,1] gain per T-F cell
  kMapping = 1,              // predict the clean representation directly
  kSignalApproximation = 2,  // predict a gain, penalize the gained noisy features
};

inline std::string objective_name(Objective o) {
  switch (o) {
    case Objective::kMasking: return "masking";
    case Objective::kMapping: return "mapping";
    case Objective::kSignalApproximation: return "signal-approximation";
  }
  throw std::logic_error("unknown objective code");
}

inline Objective objective_from_code(std::uint8_t code) {
  if (code > 2) throw std::invalid_argument("unknown objective code");
  return static_cast<Objective>(code);
}

/// One supported (input domain, output domain, objective) combination.
struct MethodConfig {
  std::string name;
  Domain input_domain = Domain::kLogFbank;
  Domain output_domain = Domain::kLogFbank;
  Objective objective = Objective::kMasking;
};

/// The eight supported method rows. fbank-family targets are predicted from
/// log-fbank inputs, fft-family targets from log-fft inputs; the linear
/// domains are covered by masking only (their value range is too wide for
/// mapping or signal approximation).
inline const std::vector<MethodConfig> &method_table() {
  static const std::vector<MethodConfig> table = {
      {"log-fbank mapping", Domain::kLogFbank, Domain::kLogFbank, Objective::kMapping},
      {"log-fbank SA", Domain::kLogFbank, Domain::kLogFbank, Objective::kSignalApproximation},
      {"log-fbank masking", Domain::kLogFbank, Domain::kLogFbank, Objective::kMasking},
      {"log-fft mapping", Domain::kLogFft, Domain::kLogFft, Objective::kMapping},
      {"log-fft SA", Domain::kLogFft, Domain::kLogFft, Objective::kSignalApproximation},
      {"log-fft masking", Domain::kLogFft, Domain::kLogFft, Objective::kMasking},
      {"fbank masking", Domain::kLogFbank, Domain::kFbank, Objective::kMasking},
      {"fft masking", Domain::kLogFft, Domain::kFft, Objective::kMasking},
  };
  return table;
}

inline std::string valid_method_names() {
  std::string names;
  for (const auto &m : method_table()) {
    if (!names.empty()) names += ", ";
    names += "\"" + m.name + "\"";
  }
  return names;
}

inline MethodConfig method_from_name(const std::string &name) {
  for (const auto &m : method_table()) {
    if (m.name == name) return m;
  }
  throw std::invalid_argument("unknown method \"" + name +
                              "\"; valid methods are: " + valid_method_names());
}

/// Looks up the table row matching a (input, output, objective) triple;
/// rejects any combination outside the eight supported rows.
inline MethodConfig method_from_triple(Domain input_domain, Domain output_domain,
                                       Objective objective) {
  for (const auto &m : method_table()) {
    if (m.input_domain == input_domain && m.output_domain == output_domain &&
        m.objective == objective) {
      return m;
    }
  }
  throw std::invalid_argument(
      "unsupported method combination (" + domain_name(input_domain) + " -> " +
      domain_name(output_domain) + ", " + objective_name(objective) +
      "); valid methods are: " + valid_method_names());
}

/// Mask-shaped heads are sigmoid; mapping heads are softplus.
inline HeadKind head_for(Objective o) {
  return o == Objective::kMapping ? HeadKind::kSoftplus : HeadKind::kSigmoid;
}

/// Feature dimensionality of a domain under the fixed front end.
inline int domain_dims(Domain d) {
  return is_fbank_domain(d) ? kMelBands : kWindowLen / 2 + 1;
}

}  // namespace sepfront
