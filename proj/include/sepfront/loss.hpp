// sepfront/loss.hpp

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

// The squared loss and the three optimization objectives built on it.
// All losses are normalized to mean-per-frame so learning rates do not
// depend on utterance length.

#pragma once

#include <Eigen/Dense>
#include <stdexcept>
#include <utility>

#include "sepfront/method.hpp"
#include "sepfront/targets.hpp"

namespace sepfront {

namespace detail {

inline void require_same_matrix_shape(const Eigen::MatrixXd &a,
                                      const Eigen::MatrixXd &b,
                                      const char *what) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw std::invalid_argument(std::string(what) + ": shape mismatch (" +
                                std::to_string(a.rows()) + "x" +
                                std::to_string(a.cols()) + " vs " +
                                std::to_string(b.rows()) + "x" +
                                std::to_string(b.cols()) + ")");
  }
}

}  // namespace detail

/// Mean over frames of the squared 2-norm of per-frame differences.
inline double squared_loss(const Eigen::MatrixXd &a, const Eigen::MatrixXd &b) {
  detail::require_same_matrix_shape(a, b, "squared_loss");
  return (a - b).squaredNorm() / static_cast<double>(a.rows());
}

inline double squared_loss(const FeatureMatrix &a, const FeatureMatrix &b) {
  return squared_loss(a.values, b.values);
}

struct ObjectiveValue {
  double loss = 0.0;
  Eigen::MatrixXd output_gradient;  // d loss / d model_output, same shape as output
};

/// Loss and exact output gradient for one method objective.
///
/// masking:  ||target_mask - out||^2 averaged per frame
/// mapping:  ||clean - out||^2 averaged per frame (caller decides whether the
///           pair target was moved into a normalized space)
/// SA:       ||clean - noisy .* out||^2 averaged per frame, with the noisy
///           output-domain features taken from pair.input (the SA rows share
///           input and output domains), and the noisy factor showing up in
///           the gradient.
inline ObjectiveValue objective_loss(const MethodConfig &config,
                                     const Eigen::MatrixXd &model_output,
                                     const TrainingPair &pair) {
  detail::require_same_matrix_shape(model_output, pair.target.values,
                                    "objective_loss: output vs target");
  const double frames = static_cast<double>(model_output.rows());

  ObjectiveValue v;
  switch (config.objective) {
    case Objective::kMasking:
    case Objective::kMapping: {
      Eigen::MatrixXd diff = model_output - pair.target.values;
      v.loss = diff.squaredNorm() / frames;
      v.output_gradient = (2.0 / frames) * diff;
      break;
    }
    case Objective::kSignalApproximation: {
      if (config.input_domain != config.output_domain) {
        throw std::invalid_argument(
            "objective_loss: signal approximation needs matching input and "
            "output domains");
      }
      detail::require_same_matrix_shape(model_output, pair.input.values,
                                        "objective_loss: output vs noisy features");
      Eigen::MatrixXd estimate = pair.input.values.cwiseProduct(model_output);
      Eigen::MatrixXd diff = estimate - pair.target.values;
      v.loss = diff.squaredNorm() / frames;
      v.output_gradient = (2.0 / frames) * diff.cwiseProduct(pair.input.values);
      break;
    }
  }
  return v;
}

}  // namespace sepfront
