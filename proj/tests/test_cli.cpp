// tests/test_cli.cpp

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

// End-to-end tests against the built sepfront binary.

#include <catch2/catch_amalgamated.hpp>

#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>

#include "sepfront/checkpoint.hpp"
#include "sepfront/enhance.hpp"
#include "sepfront/metrics.hpp"
#include "sepfront/mixing.hpp"
#include "sepfront/wav.hpp"
#include "test_util.hpp"

using namespace sepfront;
using Catch::Matchers::ContainsSubstring;

namespace {

struct CliResult {
  int exit_code;
  std::string output;  // stdout + stderr
};

CliResult run_cli(const std::string &args) {
  const std::string cmd = std::string(SEPFRONT_CLI_PATH) + " " + args + " 2>&1";
  FILE *pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  std::string output;
  char buf[4096];
  while (std::size_t n = fread(buf, 1, sizeof buf, pipe)) output.append(buf, n);
  const int status = pclose(pipe);
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, output};
}

std::string slurp(const std::string &path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in);
  return std::string((std::istreambuf_iterator<char>(in)),
                     std::istreambuf_iterator<char>());
}

int count_lines(const std::string &text) {
  int lines = 0;
  for (char c : text) {
    if (c == '\n') ++lines;
  }
  return lines;
}

/// A silence-padded speech fixture; edge-fade effects stay out of feature
/// comparisons.
Waveform quiet_edges_speech(int samples, std::uint64_t seed) {
  Waveform w = testutil::faded(testutil::speech_like(samples, seed));
  for (int i = 0; i < 32; ++i) {
    w.samples[i] = 0.0;
    w.samples[w.length() - 1 - i] = 0.0;
  }
  return w;
}

/// Checkpoint whose sigmoid head always answers ~1 (bias 40): the all-ones
/// test mask, expressed as a real model file.
void write_ones_mask_checkpoint(const std::string &path,
                                const std::string &method_name) {
  Checkpoint ck;
  ck.method = method_from_name(method_name);
  ck.head = head_for(ck.method.objective);
  const int in_dim = domain_dims(ck.method.input_domain);
  const int out_dim = domain_dims(ck.method.output_domain);
  ck.params = init_parameters(1, 4, in_dim, out_dim, 0);
  for_each_tensor(ck.params, [](auto &t) { t.setZero(); });
  ck.params.head_bias.setConstant(40.0);
  ck.input_mean = Eigen::VectorXd::Zero(in_dim);
  ck.input_std = Eigen::VectorXd::Ones(in_dim);
  save_checkpoint(path, ck);
}

}  // namespace

TEST_CASE("mix subcommand writes SNR-exact deterministic pairs", "[cli]") {
  testutil::TempDir dir("test_tmp", "cli_mix");
  write_wav(dir.file("clean.wav"), quiet_edges_speech(8000, 1));
  write_wav(dir.file("noise.wav"), testutil::shaped_noise(16000, 2));

  std::ofstream manifest(dir.file("manifest.tsv"));
  for (double snr : {0.0, 3.0, 6.0}) {
    manifest << dir.file("clean.wav") << '\t' << dir.file("noise.wav") << '\t'
             << snr << '\t' << 7 << '\n';
  }
  manifest.close();

  const std::string out_a = dir.file("out_a");
  const CliResult r = run_cli("mix --manifest " + dir.file("manifest.tsv") +
                              " --out-dir " + out_a);
  INFO(r.output);
  REQUIRE(r.exit_code == 0);
  REQUIRE_THAT(r.output, ContainsSubstring("seed 7"));

  // resolved manifest lists one line per mixture
  const std::string resolved = slurp(out_a + "/mixtures.tsv");
  REQUIRE(count_lines(resolved) == 3);

  // re-measure every written pair
  const Waveform clean = read_wav(dir.file("clean.wav"));
  std::istringstream rows(resolved);
  std::string row;
  int row_index = 0;
  const double snrs[3] = {0.0, 3.0, 6.0};
  while (std::getline(rows, row)) {
    std::stringstream ss(row);
    std::string noisy_path, noise_path;
    std::getline(ss, noisy_path, '\t');
    std::getline(ss, noise_path, '\t');
    const Waveform scaled_noise = read_wav(noise_path);
    REQUIRE(measured_snr_db(clean, scaled_noise) ==
            Catch::Approx(snrs[row_index]).margin(0.01));
    const Waveform noisy = read_wav(noisy_path);
    REQUIRE(noisy.samples.size() == clean.samples.size());
    ++row_index;
  }

  // rerun into another directory: byte-identical artifacts
  const std::string out_b = dir.file("out_b");
  REQUIRE(run_cli("mix --manifest " + dir.file("manifest.tsv") + " --out-dir " +
                  out_b)
              .exit_code == 0);
  std::istringstream rows_a(slurp(out_a + "/mixtures.tsv"));
  std::string line_a;
  while (std::getline(rows_a, line_a)) {
    std::stringstream ss(line_a);
    std::string noisy_path;
    std::getline(ss, noisy_path, '\t');
    std::string other = noisy_path;
    other.replace(other.find("out_a"), 5, "out_b");
    REQUIRE(slurp(noisy_path) == slurp(other));
  }
}

TEST_CASE("mix subcommand fails loudly on bad manifests", "[cli]") {
  testutil::TempDir dir("test_tmp", "cli_mix_bad");
  std::ofstream(dir.file("empty.tsv")) << "# nothing here\n";
  const CliResult empty = run_cli("mix --manifest " + dir.file("empty.tsv") +
                                  " --out-dir " + dir.file("out"));
  REQUIRE(empty.exit_code != 0);
  REQUIRE_THAT(empty.output, ContainsSubstring("empty manifest"));

  std::ofstream(dir.file("missing.tsv"))
      << dir.file("absent.wav") << '\t' << dir.file("absent2.wav") << "\t0\t0\n";
  const CliResult missing = run_cli("mix --manifest " + dir.file("missing.tsv") +
                                    " --out-dir " + dir.file("out"));
  REQUIRE(missing.exit_code != 0);
  REQUIRE_THAT(missing.output, ContainsSubstring("manifest line 1"));
}

TEST_CASE("train subcommand honors config files and flag overrides", "[cli]") {
  testutil::TempDir dir("test_tmp", "cli_train");
  write_wav(dir.file("clean.wav"), quiet_edges_speech(8000, 3));
  write_wav(dir.file("noise.wav"), testutil::shaped_noise(16000, 4));
  std::ofstream(dir.file("manifest.tsv"))
      << dir.file("clean.wav") << '\t' << dir.file("noise.wav") << "\t0\t1\n";

  std::ofstream config(dir.file("run.conf"));
  config << "method=\"log-fbank masking\"\n"
         << "manifest=" << dir.file("manifest.tsv") << "\n"
         << "out-dir=" << dir.file("run1") << "\n"
         << "epochs=5\n"
         << "learning-rate=0.08\n"
         << "batch-size=1\n"
         << "layers=1\n"
         << "cells=8\n"
         << "seed=0\n";
  config.close();

  const CliResult r = run_cli("train --config " + dir.file("run.conf"));
  INFO(r.output);
  REQUIRE(r.exit_code == 0);
  REQUIRE_THAT(r.output, ContainsSubstring("seed 0"));

  const std::string log = slurp(dir.file("run1") + "/loss_log.tsv");
  REQUIRE(count_lines(log) == 5);

  // per-epoch losses are monotone non-increasing within 5%
  std::istringstream lines(log);
  std::string line;
  double prev = -1.0;
  while (std::getline(lines, line)) {
    std::stringstream ss(line);
    int epoch;
    double train_loss;
    ss >> epoch >> train_loss;
    if (prev >= 0.0) REQUIRE(train_loss <= prev * 1.05);
    prev = train_loss;
  }

  const CliResult inspect = run_cli("inspect " + dir.file("run1") + "/final.sepf");
  REQUIRE(inspect.exit_code == 0);
  REQUIRE_THAT(inspect.output, ContainsSubstring("method = log-fbank masking"));
  REQUIRE_THAT(inspect.output, ContainsSubstring("cell_count = 8"));

  // flags override config keys
  const CliResult r3 = run_cli("train --config " + dir.file("run.conf") +
                               " --epochs 3 --out-dir " + dir.file("run2"));
  REQUIRE(r3.exit_code == 0);
  REQUIRE(count_lines(slurp(dir.file("run2") + "/loss_log.tsv")) == 3);
}

TEST_CASE("train subcommand rejects non-table methods by name", "[cli]") {
  testutil::TempDir dir("test_tmp", "cli_train_badmethod");
  std::ofstream(dir.file("manifest.tsv")) << "a\tb\t0\t0\n";
  const CliResult r =
      run_cli("train --method \"fbank mapping\" --manifest " +
              dir.file("manifest.tsv") + " --out-dir " + dir.file("out"));
  REQUIRE(r.exit_code != 0);
  REQUIRE_THAT(r.output, ContainsSubstring("unknown method"));
  // the error names the valid rows
  REQUIRE_THAT(r.output, ContainsSubstring("log-fbank masking"));
  REQUIRE_THAT(r.output, ContainsSubstring("fft masking"));
}

TEST_CASE("enhance subcommand writes features and waveforms", "[cli]") {
  testutil::TempDir dir("test_tmp", "cli_enhance");
  const Waveform clean = quiet_edges_speech(8192, 5);
  const Waveform noise = testutil::shaped_noise(16000, 6);
  const Waveform noisy = mix_at_snr(clean, noise, 3.0, 2).noisy;
  write_wav(dir.file("noisy.wav"), noisy);

  write_ones_mask_checkpoint(dir.file("ones_fft.sepf"), "fft masking");

  const CliResult r = run_cli("enhance --checkpoint " + dir.file("ones_fft.sepf") +
                              " --in " + dir.file("noisy.wav") +
                              " --features-out " + dir.file("est.sepx") +
                              " --wav-out " + dir.file("enhanced.wav"));
  INFO(r.output);
  REQUIRE(r.exit_code == 0);

  const Waveform rendered = read_wav(dir.file("enhanced.wav"));
  REQUIRE(rendered.samples.size() == noisy.samples.size());

  // cross-path consistency under the all-ones mask: the dump must match an
  // independent feature extraction of the written waveform (the 16-bit WAV
  // and f32 dump round trips bound how tight the agreement can be)
  const FeatureMatrix dump = read_feature_dump(dir.file("est.sepx"));
  REQUIRE(dump.domain == Domain::kFft);
  const FeatureMatrix re_extracted =
      extract_features(read_wav(dir.file("enhanced.wav")), Domain::kFft);
  REQUIRE(dump.frames() == re_extracted.frames());
  const double rel =
      (dump.values - re_extracted.values).norm() / dump.values.norm();
  REQUIRE(rel < 5e-3);  // 16-bit WAV quantization dominates this path

  // ASR-feature dump via the waveform detour
  const CliResult r2 = run_cli("enhance --checkpoint " + dir.file("ones_fft.sepf") +
                               " --in " + dir.file("noisy.wav") +
                               " --features-out " + dir.file("asr.sepx") +
                               " --via-waveform");
  REQUIRE(r2.exit_code == 0);
  REQUIRE(read_feature_dump(dir.file("asr.sepx")).domain == Domain::kLogFbank);

  const CliResult none = run_cli("enhance --checkpoint " + dir.file("ones_fft.sepf") +
                                 " --in " + dir.file("noisy.wav"));
  REQUIRE(none.exit_code != 0);
  REQUIRE_THAT(none.output, ContainsSubstring("no outputs requested"));
}

TEST_CASE("enhance subcommand refuses waveforms for mel-domain methods", "[cli]") {
  testutil::TempDir dir("test_tmp", "cli_enhance_mel");
  write_wav(dir.file("noisy.wav"), quiet_edges_speech(8000, 7));
  write_ones_mask_checkpoint(dir.file("ones_logfbank.sepf"), "log-fbank masking");
  const CliResult r = run_cli("enhance --checkpoint " +
                              dir.file("ones_logfbank.sepf") + " --in " +
                              dir.file("noisy.wav") + " --wav-out " +
                              dir.file("out.wav"));
  REQUIRE(r.exit_code != 0);
  REQUIRE_THAT(r.output, ContainsSubstring("not invertible"));
}

TEST_CASE("eval subcommand produces the comparison report", "[cli]") {
  testutil::TempDir dir("test_tmp", "cli_eval");
  for (int i = 0; i < 2; ++i) {
    write_wav(dir.file("clean" + std::to_string(i) + ".wav"),
              quiet_edges_speech(8000, 10 + i));
    write_wav(dir.file("noise" + std::to_string(i) + ".wav"),
              i == 0 ? testutil::shaped_noise(16000, 20 + i)
                     : testutil::babble_noise(16000, 20 + i));
  }
  std::ofstream manifest(dir.file("eval.tsv"));
  manifest << dir.file("clean0.wav") << '\t' << dir.file("noise0.wav")
           << "\t0\t3\tmatched\n"
           << dir.file("clean1.wav") << '\t' << dir.file("noise1.wav")
           << "\t3\t4\tunseen\n";
  manifest.close();

  write_ones_mask_checkpoint(dir.file("a.sepf"), "fft masking");
  write_ones_mask_checkpoint(dir.file("b.sepf"), "log-fbank masking");

  const std::string cmd = "eval --checkpoint " + dir.file("a.sepf") +
                          " --checkpoint " + dir.file("b.sepf") + " --manifest " +
                          dir.file("eval.tsv") + " --report-out " +
                          dir.file("report");
  const CliResult r = run_cli(cmd);
  INFO(r.output);
  REQUIRE(r.exit_code == 0);

  const std::string table = slurp(dir.file("report.txt"));
  REQUIRE_THAT(table, ContainsSubstring("fft masking"));
  REQUIRE_THAT(table, ContainsSubstring("log-fbank masking"));
  REQUIRE_THAT(table, ContainsSubstring("/noisy-baseline"));
  REQUIRE_THAT(table, ContainsSubstring("/oracle-mask"));
  REQUIRE_THAT(table, ContainsSubstring("matched"));
  REQUIRE_THAT(table, ContainsSubstring("unseen"));

  const std::string records = slurp(dir.file("report.records.tsv"));
  REQUIRE_THAT(records, ContainsSubstring("si_sdr"));
  REQUIRE_THAT(records, ContainsSubstring("feature_mse"));

  // regeneration is byte-identical
  REQUIRE(run_cli(cmd + "2").exit_code == 0);
  REQUIRE(slurp(dir.file("report.txt")) == slurp(dir.file("report2.txt")));
  REQUIRE(slurp(dir.file("report.records.tsv")) ==
          slurp(dir.file("report2.records.tsv")));
}

TEST_CASE("inspect subcommand reads both containers and rejects junk", "[cli]") {
  testutil::TempDir dir("test_tmp", "cli_inspect");
  const FeatureMatrix f = extract_features(quiet_edges_speech(8000, 30),
                                           Domain::kLogFbank);
  write_feature_dump(dir.file("f.sepx"), f);
  const CliResult r = run_cli("inspect " + dir.file("f.sepx"));
  REQUIRE(r.exit_code == 0);
  REQUIRE_THAT(r.output, ContainsSubstring("SEPX"));
  REQUIRE_THAT(r.output, ContainsSubstring("domain = log-fbank"));
  REQUIRE_THAT(r.output, ContainsSubstring("dims = 40"));

  std::ofstream(dir.file("junk.bin"), std::ios::binary) << "JUNKJUNK";
  REQUIRE(run_cli("inspect " + dir.file("junk.bin")).exit_code != 0);
}
