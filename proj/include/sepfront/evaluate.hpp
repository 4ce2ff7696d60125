// sepfront/evaluate.hpp

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

// Comparison runs over an evaluation manifest: per method, per noise
// condition, per SNR, the mean feature-domain MSE (feature path and, where
// the domain is invertible, waveform path) and SI-SDR, alongside the
// noisy-input baseline and the oracle direct-mask bound. Reports come in two
// forms: an aligned text table and a line-delimited record file
// (method<TAB>condition<TAB>snr_db<TAB>metric<TAB>value). Systems other than
// the trained model are distinguished by a method-name suffix
// ("/noisy-baseline", "/oracle-mask").

#pragma once

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <tuple>
#include <vector>

#include "sepfront/checkpoint.hpp"
#include "sepfront/enhance.hpp"
#include "sepfront/metrics.hpp"
#include "sepfront/mixing.hpp"
#include "sepfront/targets.hpp"

namespace sepfront {

struct EvaluationRecord {
  std::string method;  // table-row name, possibly with a system suffix
  std::string condition;
  double snr_db = 0.0;
  std::string metric;  // feature_mse | feature_mse_waveform | si_sdr
  double value = 0.0;
};

struct EvaluationReport {
  std::vector<EvaluationRecord> records;
  std::string table;  // human-readable aligned-column rendering
};

namespace detail {

struct MetricAccumulator {
  double sum = 0.0;
  int count = 0;
  void add(double v) {
    sum += v;
    ++count;
  }
  double mean() const { return sum / count; }
};

inline std::string format_value(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

inline std::string format_snr(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.1f", v);
  return buf;
}

}  // namespace detail

/// Runs every checkpoint over every manifest mixture. Deterministic: the
/// record order and all formatting are functions of the inputs alone.
inline EvaluationReport evaluate_run(const std::vector<Checkpoint> &checkpoints,
                                     const std::vector<MixtureSpec> &mixtures) {
  if (mixtures.empty()) throw std::invalid_argument("empty manifest: no mixtures");
  if (checkpoints.empty()) throw std::invalid_argument("no checkpoints given");

  // (method, condition, snr, metric) -> accumulator; emission order is fixed
  // separately, the map only aggregates.
  using Key = std::tuple<std::string, std::string, double, std::string>;
  std::map<Key, detail::MetricAccumulator> cells;
  std::set<std::pair<std::string, double>> condition_snrs;

  for (const Checkpoint &ck : checkpoints) {
    const std::string model_name = ck.method.name;
    const std::string baseline_name = ck.method.name + "/noisy-baseline";
    const std::string oracle_name = ck.method.name + "/oracle-mask";
    const bool invertible = !is_fbank_domain(ck.method.output_domain);

    for (const MixtureSpec &spec : mixtures) {
      condition_snrs.insert({spec.condition, spec.snr_db});
      const Waveform clean = read_wav(spec.clean_path);
      const Waveform noise = read_wav(spec.noise_path);
      const MixResult mixed = mix_at_snr(clean, noise, spec.snr_db, spec.seed);

      const FeatureMatrix clean_out =
          extract_features(clean, ck.method.output_domain);
      const FeatureMatrix noisy_out =
          extract_features(mixed.noisy, ck.method.output_domain);
      const ComplexSpectrogram noisy_spec = stft(mixed.noisy);

      auto add = [&](const std::string &method, const std::string &metric,
                     double value) {
        cells[{method, spec.condition, spec.snr_db, metric}].add(value);
      };

      // Noisy-input baseline.
      add(baseline_name, "feature_mse", feature_mse(noisy_out, clean_out));
      add(baseline_name, "si_sdr", si_sdr(mixed.noisy, clean));

      // Oracle direct mask in the method's output domain.
      const FeatureMatrix oracle_mask = direct_mask(clean_out, noisy_out);
      const FeatureMatrix oracle_est = apply_mask(noisy_out, oracle_mask.values);
      add(oracle_name, "feature_mse", feature_mse(oracle_est, clean_out));
      if (invertible) {
        const Waveform oracle_wav =
            resynthesize(oracle_est, noisy_spec, clean.length());
        add(oracle_name, "si_sdr", si_sdr(oracle_wav, clean));
        FeatureMatrix refeat = extract_features(oracle_wav, ck.method.output_domain);
        add(oracle_name, "feature_mse_waveform", feature_mse(refeat, clean_out));
      }

      // Trained model.
      const FeatureMatrix model_est = enhance_features(ck, mixed.noisy);
      add(model_name, "feature_mse", feature_mse(model_est, clean_out));
      if (invertible) {
        const Waveform model_wav =
            resynthesize(model_est, noisy_spec, clean.length());
        add(model_name, "si_sdr", si_sdr(model_wav, clean));
        FeatureMatrix refeat = extract_features(model_wav, ck.method.output_domain);
        add(model_name, "feature_mse_waveform", feature_mse(refeat, clean_out));
      }
    }
  }

  // Fixed emission order: checkpoint order, then baseline/oracle/model, then
  // condition and SNR ascending, then the metric triple.
  static const char *kMetrics[] = {"feature_mse", "feature_mse_waveform", "si_sdr"};
  EvaluationReport report;
  std::string table;
  table += "method                          condition  snr_db  feature_mse   "
           "mse_waveform  si_sdr\n";
  for (const Checkpoint &ck : checkpoints) {
    for (const std::string &method :
         {ck.method.name + "/noisy-baseline", ck.method.name + "/oracle-mask",
          ck.method.name}) {
      for (const auto &[condition, snr] : condition_snrs) {
        std::string row_values[3] = {"-", "-", "-"};
        bool any = false;
        for (int m = 0; m < 3; ++m) {
          auto it = cells.find({method, condition, snr, kMetrics[m]});
          if (it == cells.end()) continue;
          const double mean = it->second.mean();
          report.records.push_back({method, condition, snr, kMetrics[m], mean});
          row_values[m] = detail::format_value(mean);
          any = true;
        }
        if (!any) continue;
        char line[160];
        std::snprintf(line, sizeof line, "%-31s %-10s %6s  %-13s %-13s %s\n",
                      method.c_str(), condition.c_str(),
                      detail::format_snr(snr).c_str(), row_values[0].c_str(),
                      row_values[1].c_str(), row_values[2].c_str());
        table += line;
      }
    }
  }
  report.table = std::move(table);
  return report;
}

/// Writes the aligned table and the record file. Byte-identical for
/// identical inputs.
inline void write_report(const EvaluationReport &report,
                         const std::string &table_path,
                         const std::string &records_path) {
  std::ofstream table(table_path, std::ios::trunc);
  if (!table) throw std::runtime_error("cannot write report: " + table_path);
  table << report.table;

  std::ofstream records(records_path, std::ios::trunc);
  if (!records) throw std::runtime_error("cannot write report: " + records_path);
  for (const EvaluationRecord &r : report.records) {
    records << r.method << '\t' << r.condition << '\t'
            << detail::format_snr(r.snr_db) << '\t' << r.metric << '\t'
            << detail::format_value(r.value) << '\n';
  }
  if (!table || !records) throw std::runtime_error("failed writing report files");
}

}  // namespace sepfront
