// sepfront/train.hpp

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

// Optimization loop over utterance batches: momentum SGD with global
// gradient-norm clipping, deterministic 90/10 train/validation split, input
// standardization gathered from the training split, and SEPF checkpointing.
//
// Per-utterance passes inside a batch may run on worker threads (capped by
// the SEPF_THREADS environment variable); each utterance writes into its own
// gradient slot and the reduction walks slots in utterance order, so results
// are bit-identical for any worker count.

#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "sepfront/checkpoint.hpp"
#include "sepfront/loss.hpp"
#include "sepfront/mixing.hpp"
#include "sepfront/targets.hpp"
#include "sepfront/wav.hpp"

namespace sepfront {

struct TrainingConfig {
  MethodConfig method;
  int epochs = 50;
  double learning_rate = 1e-3;
  int batch_size = 4;  // utterances per step
  double clip_norm = 5.0;
  double momentum = 0.9;
  std::uint64_t seed = 0;
  int checkpoint_every = 0;  // epochs between checkpoints; 0 = final only
  int layer_count = 2;
  int cell_count = 64;
  std::string out_dir;        // empty = keep everything in memory
  std::string warm_start;     // resume from this SEPF checkpoint instead of
                              // seed-initializing (architecture must match)
};

struct LossReport {
  int epoch = 0;  // 1-based
  double train_loss = 0.0;
  std::optional<double> val_loss;  // absent when the validation split is empty
};

struct TrainResult {
  Checkpoint checkpoint;
  std::vector<LossReport> reports;
};

namespace detail {

inline int worker_count(int tasks) {
  int cap = static_cast<int>(std::thread::hardware_concurrency());
  if (cap < 1) cap = 1;
  if (const char *env = std::getenv("SEPF_THREADS")) {
    const int v = std::atoi(env);
    if (v >= 1) cap = v;
  }
  return std::max(1, std::min(cap, tasks));
}

// Hand-rolled Fisher-Yates so the order depends only on the seed, not on a
// library's distribution implementation.
inline void shuffle_indices(std::vector<int> &idx, std::mt19937_64 &rng) {
  for (std::size_t i = idx.size(); i > 1; --i) {
    const std::size_t j = static_cast<std::size_t>(rng() % i);
    std::swap(idx[i - 1], idx[j]);
  }
}

/// Runs fn(i) for i in [0, n) on up to worker_count(n) threads. Exceptions
/// are captured and rethrown (lowest index wins).
template <typename Fn>
void parallel_for(int n, Fn &&fn) {
  const int workers = worker_count(n);
  if (workers <= 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::exception_ptr> errors(n);
  std::atomic<int> next{0};
  auto body = [&]() {
    for (int i = next.fetch_add(1); i < n; i = next.fetch_add(1)) {
      try {
        fn(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (int w = 0; w < workers; ++w) pool.emplace_back(body);
  for (auto &t : pool) t.join();
  for (auto &e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

}  // namespace detail

/// Deterministic 90/10 split by utterance index under the run seed. With
/// fewer than 10 utterances everything lands in the training split.
inline std::pair<std::vector<int>, std::vector<int>> train_val_split(
    int utterance_count, std::uint64_t seed) {
  std::vector<int> idx(utterance_count);
  std::iota(idx.begin(), idx.end(), 0);
  std::mt19937_64 rng(seed);
  detail::shuffle_indices(idx, rng);
  const int val_count = utterance_count / 10;
  std::vector<int> train(idx.begin(), idx.end() - val_count);
  std::vector<int> val(idx.end() - val_count, idx.end());
  std::sort(train.begin(), train.end());
  std::sort(val.begin(), val.end());
  return {std::move(train), std::move(val)};
}

/// Loads, mixes, and featurizes every manifest entry under one method.
inline std::vector<TrainingPair> build_dataset(
    const std::vector<MixtureSpec> &dataset, const MethodConfig &method) {
  if (dataset.empty()) throw std::invalid_argument("empty manifest: no mixtures");
  std::vector<TrainingPair> pairs(dataset.size());
  detail::parallel_for(static_cast<int>(dataset.size()), [&](int i) {
    const Waveform clean = read_wav(dataset[i].clean_path);
    const Waveform noise = read_wav(dataset[i].noise_path);
    const MixResult mixed =
        mix_at_snr(clean, noise, dataset[i].snr_db, dataset[i].seed);
    pairs[i] = build_training_pair(clean, mixed.noisy, method);
  });
  return pairs;
}

namespace detail {

struct FeatureStats {
  Eigen::VectorXd mean, std;
};

inline FeatureStats input_stats(const std::vector<TrainingPair> &pairs,
                                const std::vector<int> &subset) {
  const Eigen::Index dims = pairs.at(subset.at(0)).input.values.cols();
  Eigen::VectorXd sum = Eigen::VectorXd::Zero(dims);
  Eigen::VectorXd sum_sq = Eigen::VectorXd::Zero(dims);
  double frames = 0.0;
  for (int u : subset) {
    const Eigen::MatrixXd &x = pairs[u].input.values;
    sum += x.colwise().sum().transpose();
    sum_sq += x.array().square().colwise().sum().matrix().transpose();
    frames += static_cast<double>(x.rows());
  }
  FeatureStats s;
  s.mean = sum / frames;
  s.std = ((sum_sq / frames) - s.mean.cwiseProduct(s.mean))
              .cwiseMax(0.0)
              .cwiseSqrt()
              .cwiseMax(1e-6);
  return s;
}

/// Affine output transform for mapping targets: t' = (t - offset) / scale
/// with offset = min - std and scale = std over the training split. Every
/// training target lands at t' >= 1, inside the softplus head's range.
struct OutputTransform {
  Eigen::VectorXd offset, scale;
};

inline OutputTransform output_transform(const std::vector<TrainingPair> &pairs,
                                        const std::vector<int> &subset) {
  const Eigen::Index dims = pairs.at(subset.at(0)).target.values.cols();
  Eigen::VectorXd sum = Eigen::VectorXd::Zero(dims);
  Eigen::VectorXd sum_sq = Eigen::VectorXd::Zero(dims);
  Eigen::VectorXd min_v = Eigen::VectorXd::Constant(
      dims, std::numeric_limits<double>::infinity());
  double frames = 0.0;
  for (int u : subset) {
    const Eigen::MatrixXd &t = pairs[u].target.values;
    sum += t.colwise().sum().transpose();
    sum_sq += t.array().square().colwise().sum().matrix().transpose();
    min_v = min_v.cwiseMin(t.colwise().minCoeff().transpose());
    frames += static_cast<double>(t.rows());
  }
  const Eigen::VectorXd mean = sum / frames;
  const Eigen::VectorXd std =
      ((sum_sq / frames) - mean.cwiseProduct(mean)).cwiseMax(0.0).cwiseSqrt()
          .cwiseMax(1e-6);
  return {min_v - std, std};
}

inline Eigen::MatrixXd standardize(const Eigen::MatrixXd &x,
                                   const Eigen::VectorXd &mean,
                                   const Eigen::VectorXd &std) {
  return (x.rowwise() - mean.transpose()).array().rowwise() /
         std.transpose().array();
}

}  // namespace detail

/// Trains a model on SNR-mixed utterances. Deterministic given the config
/// seed; emits one LossReport per epoch; writes checkpoints and a loss log
/// under config.out_dir when it is set.
inline TrainResult train(const std::vector<MixtureSpec> &dataset,
                         const TrainingConfig &config) {
  if (dataset.empty()) throw std::invalid_argument("empty manifest: no mixtures");
  if (config.epochs < 1 || config.learning_rate < 0.0 || config.batch_size < 1 ||
      config.clip_norm <= 0.0 || config.momentum < 0.0 || config.momentum >= 1.0 ||
      config.layer_count < 1 || config.cell_count < 1) {
    throw std::invalid_argument("training hyperparameters must be positive");
  }
  const MethodConfig &method = config.method;
  method_from_triple(method.input_domain, method.output_domain, method.objective);

  std::vector<TrainingPair> pairs = build_dataset(dataset, method);
  auto [train_idx, val_idx] =
      train_val_split(static_cast<int>(pairs.size()), config.seed);

  const int input_dim = domain_dims(method.input_domain);
  const int output_dim = domain_dims(method.output_domain);
  const HeadKind head = head_for(method.objective);
  ModelParameters params;
  Checkpoint ck;
  if (config.warm_start.empty()) {
    params = init_parameters(config.layer_count, config.cell_count, input_dim,
                             output_dim, config.seed);
    const detail::FeatureStats stats = detail::input_stats(pairs, train_idx);
    ck.input_mean = stats.mean;
    ck.input_std = stats.std;
    if (method.objective == Objective::kMapping) {
      const detail::OutputTransform out_tf =
          detail::output_transform(pairs, train_idx);
      ck.output_offset = out_tf.offset;
      ck.output_scale = out_tf.scale;
    }
  } else {
    // Resume: keep the stored weights and normalization statistics so the
    // continued run optimizes the same problem.
    Checkpoint prev = load_checkpoint(config.warm_start);
    if (prev.method.name != method.name ||
        prev.params.layer_count != config.layer_count ||
        prev.params.cell_count != config.cell_count) {
      throw std::invalid_argument(
          "warm start mismatch: checkpoint is " + prev.method.name + " " +
          std::to_string(prev.params.layer_count) + "x" +
          std::to_string(prev.params.cell_count));
    }
    params = std::move(prev.params);
    ck.input_mean = std::move(prev.input_mean);
    ck.input_std = std::move(prev.input_std);
    ck.output_offset = std::move(prev.output_offset);
    ck.output_scale = std::move(prev.output_scale);
  }
  ModelParameters velocity = zeros_like(params);
  ck.head = head;
  ck.method = method;

  if (method.objective == Objective::kMapping) {
    for (TrainingPair &p : pairs) {
      p.target.values = (p.target.values.rowwise() - ck.output_offset.transpose())
                            .array()
                            .rowwise() /
                        ck.output_scale.transpose().array();
    }
  }
  std::vector<Eigen::MatrixXd> net_inputs(pairs.size());
  for (std::size_t u = 0; u < pairs.size(); ++u) {
    net_inputs[u] =
        detail::standardize(pairs[u].input.values, ck.input_mean, ck.input_std);
  }

  const bool writing = !config.out_dir.empty();
  if (writing) std::filesystem::create_directories(config.out_dir);
  auto checkpoint_path = [&](const std::string &stem) {
    return (std::filesystem::path(config.out_dir) / (stem + ".sepf")).string();
  };

  auto utterance_loss = [&](int u) {
    const Eigen::MatrixXd out = forward(params, head, net_inputs[u]);
    return objective_loss(method, out, pairs[u]).loss;
  };

  // The shuffling stream is separate from the init/split stream so changing
  // the epoch count never perturbs initialization.
  std::mt19937_64 order_rng(config.seed ^ 0x9e3779b97f4a7c15ULL);

  TrainResult result;
  std::vector<int> order = train_idx;
  const int batch = std::min<int>(config.batch_size,
                                  static_cast<int>(train_idx.size()));
  std::vector<ModelParameters> slot_grads(batch);
  std::vector<double> slot_losses(batch);

  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    detail::shuffle_indices(order, order_rng);
    double epoch_loss_sum = 0.0;
    int epoch_loss_count = 0;

    for (std::size_t start = 0; start < order.size(); start += batch) {
      const int b = static_cast<int>(
          std::min<std::size_t>(batch, order.size() - start));
      detail::parallel_for(b, [&](int k) {
        const int u = order[start + k];
        const ForwardCache cache = forward_with_cache(params, head, net_inputs[u]);
        const ObjectiveValue ov = objective_loss(method, cache.output, pairs[u]);
        slot_losses[k] = ov.loss;
        slot_grads[k] = backward(params, head, cache, ov.output_gradient);
      });

      double batch_loss = 0.0;
      ModelParameters grad = zeros_like(params);
      for (int k = 0; k < b; ++k) {  // fixed reduction order
        batch_loss += slot_losses[k];
        axpy(1.0 / b, slot_grads[k], grad);
      }
      batch_loss /= b;
      if (!std::isfinite(batch_loss)) {
        throw std::runtime_error(
            "training diverged: non-finite loss at epoch " +
            std::to_string(epoch + 1) + ", batch " +
            std::to_string(start / batch + 1));
      }
      epoch_loss_sum += batch_loss * b;
      epoch_loss_count += b;

      const double norm = std::sqrt(squared_norm(grad));
      if (norm > config.clip_norm) {
        scale_parameters(grad, config.clip_norm / norm);
      }
      scale_parameters(velocity, config.momentum);
      axpy(1.0, grad, velocity);
      axpy(-config.learning_rate, velocity, params);
      if (!all_finite(params)) {
        throw std::runtime_error(
            "training diverged: non-finite parameters at epoch " +
            std::to_string(epoch + 1) + ", batch " +
            std::to_string(start / batch + 1));
      }
    }

    LossReport report;
    report.epoch = epoch + 1;
    report.train_loss = epoch_loss_sum / epoch_loss_count;
    if (!val_idx.empty()) {
      double val_sum = 0.0;
      for (int u : val_idx) val_sum += utterance_loss(u);
      report.val_loss = val_sum / static_cast<double>(val_idx.size());
    }
    result.reports.push_back(report);

    if (writing && config.checkpoint_every > 0 &&
        (epoch + 1) % config.checkpoint_every == 0) {
      ck.params = params;
      char stem[32];
      std::snprintf(stem, sizeof stem, "checkpoint_epoch%04d", epoch + 1);
      save_checkpoint(checkpoint_path(stem), ck);
    }
  }

  ck.params = std::move(params);
  result.checkpoint = std::move(ck);

  if (writing) {
    save_checkpoint(checkpoint_path("final"), result.checkpoint);
    std::ofstream log(std::filesystem::path(config.out_dir) / "loss_log.tsv",
                      std::ios::trunc);
    if (!log) throw std::runtime_error("cannot write loss log in " + config.out_dir);
    for (const LossReport &r : result.reports) {
      char line[96];
      if (r.val_loss) {
        std::snprintf(line, sizeof line, "%d\t%.9e\t%.9e\n", r.epoch,
                      r.train_loss, *r.val_loss);
      } else {
        std::snprintf(line, sizeof line, "%d\t%.9e\t-\n", r.epoch, r.train_loss);
      }
      log << line;
    }
  }
  return result;
}

}  // namespace sepfront
