// tests/test_evaluation.cpp

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

#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <fstream>

#include "sepfront/evaluate.hpp"
#include "sepfront/metrics.hpp"
#include "test_util.hpp"

using namespace sepfront;
using Catch::Matchers::ContainsSubstring;

namespace {

double record_value(const EvaluationReport &report, const std::string &method,
                    const std::string &condition, double snr,
                    const std::string &metric) {
  for (const EvaluationRecord &r : report.records) {
    if (r.method == method && r.condition == condition && r.snr_db == snr &&
        r.metric == metric) {
      return r.value;
    }
  }
  FAIL("missing record " << method << "/" << condition << "/" << snr << "/"
                         << metric);
  return 0.0;
}

std::string slurp(const std::string &path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in);
  return std::string((std::istreambuf_iterator<char>(in)),
                     std::istreambuf_iterator<char>());
}

}  // namespace

TEST_CASE("feature_mse basics", "[evaluation]") {
  const Waveform w = testutil::speech_like(8000, 1);
  const FeatureMatrix clean = extract_features(w, Domain::kLogFbank);
  REQUIRE(feature_mse(clean, clean) == 0.0);

  FeatureMatrix shifted = clean;
  shifted.values.array() += 1.0;
  REQUIRE(feature_mse(shifted, clean) == Catch::Approx(40.0).epsilon(1e-12));

  FeatureMatrix other = clean;
  other.domain = Domain::kFbank;
  REQUIRE_THROWS_WITH(feature_mse(other, clean), ContainsSubstring("domain mismatch"));
}

TEST_CASE("noisy-vs-clean MSE matches the pinned reference constant",
          "[evaluation]") {
  // fixture re-derived by tests/oracles/feature_mse_reference.py
  Waveform clean;
  clean.sample_rate = 16000;
  clean.samples.resize(16000);
  Waveform interferer = clean;
  for (int i = 0; i < 16000; ++i) {
    const double t = i / 16000.0;
    clean.samples[i] = 0.4 * std::sin(2.0 * std::numbers::pi * 1000.0 * t);
    interferer.samples[i] = 0.1 * std::sin(2.0 * std::numbers::pi * 3000.0 * t);
  }
  const MixResult mixed = mix_at_snr(clean, interferer, 0.0, 0);
  const double mse = feature_mse(extract_features(mixed.noisy, Domain::kFft),
                                 extract_features(clean, Domain::kFft));
  REQUIRE(mse == Catch::Approx(5242.107421327453).epsilon(1e-9));
}

TEST_CASE("si_sdr caps, scales and errors", "[evaluation]") {
  const Waveform ref = testutil::speech_like(8000, 2);

  SECTION("identical estimate hits the cap") {
    REQUIRE(si_sdr(ref, ref) == 100.0);
  }

  SECTION("positive scaling is invisible") {
    Waveform twice = ref;
    for (double &s : twice.samples) s *= 2.0;
    REQUIRE(si_sdr(twice, ref) == 100.0);

    Waveform noisy = ref;
    std::mt19937_64 g(3);
    for (double &s : noisy.samples) s += 0.05 * testutil::gaussian(g);
    const double base = si_sdr(noisy, ref);
    for (double c : {0.1, 3.0, 1234.5}) {
      Waveform scaled = noisy;
      for (double &s : scaled.samples) s *= c;
      REQUIRE(std::abs(si_sdr(scaled, ref) - base) < 1e-9);
    }
  }

  SECTION("equal-power orthogonal noise sits at 0 dB") {
    // make the noise exactly orthogonal by Gram-Schmidt, then match power
    Waveform noise = testutil::white_noise(8000, 4, 0.3);
    double dot = 0.0, ref_e = 0.0, noise_e;
    for (int i = 0; i < 8000; ++i) dot += noise.samples[i] * ref.samples[i];
    for (double s : ref.samples) ref_e += s * s;
    for (int i = 0; i < 8000; ++i) noise.samples[i] -= (dot / ref_e) * ref.samples[i];
    noise_e = 0.0;
    for (double s : noise.samples) noise_e += s * s;
    const double match = std::sqrt(ref_e / noise_e);
    Waveform est = ref;
    for (int i = 0; i < 8000; ++i) est.samples[i] += match * noise.samples[i];
    REQUIRE(si_sdr(est, ref) == Catch::Approx(0.0).margin(0.1));
  }

  SECTION("silent reference and length mismatch are rejected") {
    Waveform silent;
    silent.sample_rate = 16000;
    silent.samples.assign(8000, 0.0);
    REQUIRE_THROWS_WITH(si_sdr(ref, silent), ContainsSubstring("silent reference"));
    Waveform shorter = ref;
    shorter.samples.pop_back();
    REQUIRE_THROWS_WITH(si_sdr(shorter, ref), ContainsSubstring("length mismatch"));
  }
}

TEST_CASE("evaluate_run produces the full baseline/oracle/model table",
          "[evaluation][slow]") {
  testutil::TempDir dir("test_tmp", "evaluate_run");

  // six mixtures: matched noise at 0/3/6 dB, unseen babble at 0/3/6 dB
  std::vector<MixtureSpec> mixtures;
  for (int i = 0; i < 6; ++i) {
    const std::string clean = dir.file("clean" + std::to_string(i) + ".wav");
    const std::string noise = dir.file("noise" + std::to_string(i) + ".wav");
    write_wav(clean, testutil::speech_like(16000, 900 + i));
    const bool unseen = i >= 3;
    write_wav(noise, unseen ? testutil::babble_noise(24000, 950 + i)
                            : testutil::shaped_noise(24000, 950 + i));
    mixtures.push_back({clean, noise, 3.0 * (i % 3), 7ull + i,
                        unseen ? "unseen" : "matched"});
  }

  // model under test: a lightly trained fft-masking net (random-initialized
  // weights are fine for the structural assertions)
  Checkpoint ck;
  ck.method = method_from_name("fft masking");
  ck.head = HeadKind::kSigmoid;
  ck.params = init_parameters(1, 8, 257, 257, 5);
  ck.input_mean = Eigen::VectorXd::Zero(257);
  ck.input_std = Eigen::VectorXd::Ones(257);

  const EvaluationReport report = evaluate_run({ck}, mixtures);

  SECTION("oracle SI-SDR dominates the model everywhere") {
    for (const std::string &cond : {std::string("matched"), std::string("unseen")}) {
      for (double snr : {0.0, 3.0, 6.0}) {
        const double oracle =
            record_value(report, "fft masking/oracle-mask", cond, snr, "si_sdr");
        const double model = record_value(report, "fft masking", cond, snr, "si_sdr");
        REQUIRE(oracle >= model);
      }
    }
  }

  SECTION("the 0 dB baseline sits near 0 dB SI-SDR and rises with SNR") {
    const double b0 =
        record_value(report, "fft masking/noisy-baseline", "matched", 0.0, "si_sdr");
    const double b3 =
        record_value(report, "fft masking/noisy-baseline", "matched", 3.0, "si_sdr");
    const double b6 =
        record_value(report, "fft masking/noisy-baseline", "matched", 6.0, "si_sdr");
    REQUIRE(b0 == Catch::Approx(0.0).margin(0.5));
    REQUIRE(b3 > b0);
    REQUIRE(b6 > b3);
  }

  SECTION("oracle masking never trails the noisy baseline in feature MSE") {
    for (const std::string &cond : {std::string("matched"), std::string("unseen")}) {
      for (double snr : {0.0, 3.0, 6.0}) {
        const double baseline = record_value(
            report, "fft masking/noisy-baseline", cond, snr, "feature_mse");
        const double oracle = record_value(
            report, "fft masking/oracle-mask", cond, snr, "feature_mse");
        REQUIRE(oracle <= baseline);
      }
    }
  }

  SECTION("reports regenerate byte-identically") {
    write_report(report, dir.file("r1.txt"), dir.file("r1.records.tsv"));
    const EvaluationReport again = evaluate_run({ck}, mixtures);
    write_report(again, dir.file("r2.txt"), dir.file("r2.records.tsv"));
    REQUIRE(slurp(dir.file("r1.txt")) == slurp(dir.file("r2.txt")));
    REQUIRE(slurp(dir.file("r1.records.tsv")) == slurp(dir.file("r2.records.tsv")));
    REQUIRE(report.table.find("fft masking/oracle-mask") != std::string::npos);
    REQUIRE(report.table.find("fft masking/noisy-baseline") != std::string::npos);
  }

  SECTION("empty inputs are rejected") {
    REQUIRE_THROWS_WITH(evaluate_run({ck}, {}), ContainsSubstring("empty manifest"));
    REQUIRE_THROWS_WITH(evaluate_run({}, mixtures), ContainsSubstring("no checkpoints"));
  }
}
