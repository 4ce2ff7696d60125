// tools/sepfront.cpp

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

// Command-line surface: mixture generation, training, enhancement,
// evaluation, and container inspection. Every command is deterministic given
// identical inputs and seeds; seeds are echoed in the log output.

#include <CLI11.hpp>

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "sepfront/checkpoint.hpp"
#include "sepfront/enhance.hpp"
#include "sepfront/evaluate.hpp"
#include "sepfront/mixing.hpp"
#include "sepfront/train.hpp"
#include "sepfront/wav.hpp"

namespace fs = std::filesystem;

namespace {

std::string stem_of(const std::string &path) {
  return fs::path(path).stem().string();
}

std::string trimmed(const std::string &s) {
  const std::size_t a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  const std::size_t b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

/// key=value run-config reader ('#' comments, optional double quotes around
/// the value). Returned in file order; the caller appends command-line flags
/// afterwards so they take precedence.
std::vector<std::pair<std::string, std::string>> read_run_config(
    const std::string &path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file: " + path);
  std::vector<std::pair<std::string, std::string>> items;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string text = trimmed(line);
    if (text.empty() || text[0] == '#') continue;
    const std::size_t eq = text.find('=');
    if (eq == std::string::npos || eq == 0) {
      throw std::runtime_error(path + ":" + std::to_string(line_no) +
                               ": expected key=value");
    }
    std::string key = trimmed(text.substr(0, eq));
    std::string value = trimmed(text.substr(eq + 1));
    if (value.size() >= 2 && value.front() == '"' && value.back() == '"') {
      value = value.substr(1, value.size() - 2);
    }
    items.emplace_back(std::move(key), std::move(value));
  }
  return items;
}

/// Splices `--key value` pairs from a `train --config FILE` into the argument
/// list, ahead of the explicit flags.
std::vector<std::string> expand_config_args(std::vector<std::string> args) {
  if (args.empty() || args[0] != "train") return args;
  std::string config_path;
  for (std::size_t i = 1; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) {
      config_path = args[i + 1];
      break;
    }
    if (args[i].rfind("--config=", 0) == 0) {
      config_path = args[i].substr(9);
      break;
    }
  }
  if (config_path.empty()) return args;

  std::vector<std::string> expanded;
  expanded.push_back("train");
  for (const auto &[key, value] : read_run_config(config_path)) {
    expanded.push_back("--" + key);
    expanded.push_back(value);
  }
  expanded.insert(expanded.end(), args.begin() + 1, args.end());
  return expanded;
}

std::string format_snr(double snr_db) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.1f", snr_db);
  return buf;
}

int run_mix(const std::string &manifest_path, const std::string &out_dir) {
  const std::vector<sepfront::MixtureSpec> specs =
      sepfront::read_manifest(manifest_path);
  fs::create_directories(out_dir);

  std::string resolved;
  int failures = 0;
  for (std::size_t i = 0; i < specs.size(); ++i) {
    const sepfront::MixtureSpec &spec = specs[i];
    try {
      const sepfront::Waveform clean = sepfront::read_wav(spec.clean_path);
      const sepfront::Waveform noise = sepfront::read_wav(spec.noise_path);
      const sepfront::MixResult mixed =
          sepfront::mix_at_snr(clean, noise, spec.snr_db, spec.seed);

      char base[160];
      std::snprintf(base, sizeof base, "%03zu_%s_snr%sdB_seed%llu", i,
                    stem_of(spec.clean_path).c_str(),
                    format_snr(spec.snr_db).c_str(),
                    static_cast<unsigned long long>(spec.seed));
      const std::string noisy_path = (fs::path(out_dir) / (std::string(base) + ".noisy.wav")).string();
      const std::string noise_path = (fs::path(out_dir) / (std::string(base) + ".noise.wav")).string();
      sepfront::write_wav(noisy_path, mixed.noisy);
      sepfront::write_wav(noise_path, mixed.scaled_noise);

      resolved += noisy_path + "\t" + noise_path + "\t" + spec.clean_path + "\t" +
                  format_snr(spec.snr_db) + "\t" + std::to_string(spec.seed) +
                  "\t" + spec.condition + "\n";
      std::cout << "wrote " << noisy_path << " (snr " << format_snr(spec.snr_db)
                << " dB, seed " << spec.seed << ")\n";
    } catch (const std::exception &e) {
      std::cerr << "error: manifest line " << (i + 1) << ": " << e.what() << "\n";
      ++failures;
    }
  }

  const std::string resolved_path = (fs::path(out_dir) / "mixtures.tsv").string();
  std::ofstream out(resolved_path, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write resolved manifest: " + resolved_path);
  out << resolved;
  std::cout << "wrote " << resolved_path << "\n";
  return failures == 0 ? 0 : 1;
}

int run_train(const sepfront::TrainingConfig &config,
              const std::string &manifest_path) {
  const std::vector<sepfront::MixtureSpec> dataset =
      sepfront::read_manifest(manifest_path);
  std::cout << "method " << config.method.name << ", " << dataset.size()
            << " mixtures, seed " << config.seed << "\n";

  const sepfront::TrainResult result = sepfront::train(dataset, config);
  for (const sepfront::LossReport &r : result.reports) {
    char line[128];
    if (r.val_loss) {
      std::snprintf(line, sizeof line, "epoch %d  train %.9e  val %.9e\n",
                    r.epoch, r.train_loss, *r.val_loss);
    } else {
      std::snprintf(line, sizeof line, "epoch %d  train %.9e\n", r.epoch,
                    r.train_loss);
    }
    std::cout << line;
  }
  std::cout << "wrote " << (fs::path(config.out_dir) / "final.sepf").string()
            << "\n";
  return 0;
}

int run_enhance(const std::string &checkpoint_path, const std::string &wav_in,
                const std::string &features_out, const std::string &wav_out,
                bool via_waveform) {
  if (features_out.empty() && wav_out.empty()) {
    throw std::runtime_error("no outputs requested: pass --features-out and/or --wav-out");
  }
  const sepfront::Checkpoint ck = sepfront::load_checkpoint(checkpoint_path);
  const sepfront::Waveform noisy = sepfront::read_wav(wav_in);
  std::cout << "method " << ck.method.name << " on " << wav_in << "\n";

  if (!wav_out.empty()) {
    const sepfront::FeatureMatrix estimate = sepfront::enhance_features(ck, noisy);
    const sepfront::Waveform rendered =
        sepfront::resynthesize(estimate, sepfront::stft(noisy), noisy.length());
    sepfront::write_wav(wav_out, rendered);
    std::cout << "wrote " << wav_out << "\n";
  }
  if (!features_out.empty()) {
    const sepfront::FeatureMatrix features =
        via_waveform ? sepfront::enhance_to_asr_features(ck, noisy, true)
                     : sepfront::enhance_features(ck, noisy);
    sepfront::write_feature_dump(features_out, features);
    std::cout << "wrote " << features_out << "\n";
  }
  return 0;
}

int run_eval(const std::vector<std::string> &checkpoint_paths,
             const std::string &manifest_path, const std::string &report_out) {
  std::vector<sepfront::Checkpoint> checkpoints;
  checkpoints.reserve(checkpoint_paths.size());
  for (const std::string &p : checkpoint_paths) {
    checkpoints.push_back(sepfront::load_checkpoint(p));
    std::cout << "loaded " << p << " (" << checkpoints.back().method.name << ")\n";
  }
  const std::vector<sepfront::MixtureSpec> mixtures =
      sepfront::read_manifest(manifest_path);

  const sepfront::EvaluationReport report =
      sepfront::evaluate_run(checkpoints, mixtures);
  const std::string table_path = report_out + ".txt";
  const std::string records_path = report_out + ".records.tsv";
  sepfront::write_report(report, table_path, records_path);
  std::cout << report.table;
  std::cout << "wrote " << table_path << "\nwrote " << records_path << "\n";
  return 0;
}

int run_inspect(const std::string &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open: " + path);
  char magic[4] = {};
  in.read(magic, 4);
  if (!in) throw std::runtime_error("file too short: " + path);
  in.close();

  if (std::string(magic, 4) == "SEPX") {
    const sepfront::FeatureMatrix f = sepfront::read_feature_dump(path);
    std::cout << "container = SEPX feature dump\n"
              << "domain = " << sepfront::domain_name(f.domain) << "\n"
              << "frame_hop = " << f.frame_hop << "\n"
              << "window_len = " << f.window_len << "\n"
              << "sample_rate = " << f.sample_rate << "\n"
              << "frames = " << f.frames() << "\n"
              << "dims = " << f.dims() << "\n";
    return 0;
  }
  if (std::string(magic, 4) == "SEPF") {
    const sepfront::Checkpoint ck = sepfront::load_checkpoint(path);
    std::cout << "container = SEPF checkpoint\n"
              << "method = " << ck.method.name << "\n"
              << "objective = " << sepfront::objective_name(ck.method.objective) << "\n"
              << "input_domain = " << sepfront::domain_name(ck.method.input_domain) << "\n"
              << "output_domain = " << sepfront::domain_name(ck.method.output_domain) << "\n"
              << "head = " << sepfront::head_name(ck.head) << "\n"
              << "layer_count = " << ck.params.layer_count << "\n"
              << "cell_count = " << ck.params.cell_count << "\n"
              << "input_dim = " << ck.params.input_dim << "\n"
              << "output_dim = " << ck.params.output_dim << "\n"
              << "sample_rate = " << ck.sample_rate << "\n"
              << "window_len = " << ck.window_len << "\n"
              << "frame_hop = " << ck.frame_hop << "\n"
              << "mel_bands = " << ck.mel_bands << "\n"
              << "output_norm = " << (ck.has_output_norm() ? "yes" : "no") << "\n";
    return 0;
  }
  throw std::runtime_error("unknown container (magic \"" +
                           std::string(magic, 4) + "\") in " + path);
}

}  // namespace

int main(int argc, char **argv) {
  CLI::App app{
      "sepfront - supervised speech-enhancement front end\n"
      "Masking, mapping and signal-approximation objectives over fft, "
      "log-fft,\nfbank and log-fbank domains with a BiLSTM separator. "
      "SEPF_THREADS caps\nthe worker count."};
  app.require_subcommand(1);

  // mix
  std::string mix_manifest, mix_out_dir;
  CLI::App *mix = app.add_subcommand(
      "mix", "Synthesize noisy/noise WAV pairs from a mixture manifest");
  mix->add_option("--manifest", mix_manifest,
                  "clean<TAB>noise<TAB>snr_db<TAB>seed[<TAB>condition] lines")
      ->required();
  mix->add_option("--out-dir", mix_out_dir, "output directory")->required();

  // train: every option may come from the key=value config file (same key
  // names, no leading dashes); explicit flags win because they are parsed
  // last.
  sepfront::TrainingConfig tc;
  std::string train_method, train_manifest, train_config_path;
  CLI::App *train = app.add_subcommand("train", "Train a separation model");
  const auto take_last = CLI::MultiOptionPolicy::TakeLast;
  train->add_option("--config", train_config_path,
                    "key=value file; command-line flags override file keys")
      ->multi_option_policy(take_last);
  train->add_option("--method", train_method,
                    "one of: " + sepfront::valid_method_names())
      ->required()
      ->multi_option_policy(take_last);
  train->add_option("--manifest", train_manifest, "training mixture manifest")
      ->required()
      ->multi_option_policy(take_last);
  train->add_option("--out-dir", tc.out_dir, "checkpoint/log directory")
      ->required()
      ->multi_option_policy(take_last);
  train->add_option("--epochs", tc.epochs)
      ->check(CLI::PositiveNumber)
      ->multi_option_policy(take_last);
  train->add_option("--learning-rate", tc.learning_rate)
      ->check(CLI::NonNegativeNumber)
      ->multi_option_policy(take_last);
  train->add_option("--batch-size", tc.batch_size)
      ->check(CLI::PositiveNumber)
      ->multi_option_policy(take_last);
  train->add_option("--clip-norm", tc.clip_norm)
      ->check(CLI::PositiveNumber)
      ->multi_option_policy(take_last);
  train->add_option("--momentum", tc.momentum)
      ->check(CLI::Range(0.0, 0.999))
      ->multi_option_policy(take_last);
  train->add_option("--seed", tc.seed, "run seed (default 0)")
      ->multi_option_policy(take_last);
  train->add_option("--checkpoint-every", tc.checkpoint_every,
                    "epochs between checkpoints, 0 = final only")
      ->multi_option_policy(take_last);
  train->add_option("--warm-start", tc.warm_start,
                    "resume from this checkpoint instead of seed-initializing")
      ->multi_option_policy(take_last);
  train->add_option("--layers", tc.layer_count)
      ->check(CLI::PositiveNumber)
      ->multi_option_policy(take_last);
  train->add_option("--cells", tc.cell_count, "LSTM cells per direction")
      ->check(CLI::PositiveNumber)
      ->multi_option_policy(take_last);

  // enhance
  std::string enh_checkpoint, enh_in, enh_features_out, enh_wav_out;
  bool enh_via_waveform = false;
  CLI::App *enhance = app.add_subcommand("enhance", "Enhance one noisy WAV");
  enhance->add_option("--checkpoint", enh_checkpoint, "SEPF checkpoint")->required();
  enhance->add_option("--in", enh_in, "noisy input WAV")->required();
  enhance->add_option("--features-out", enh_features_out,
                      "SEPX dump of the estimate (or, with --via-waveform, of "
                      "log-fbank features recomputed from the rendered waveform)");
  enhance->add_option("--wav-out", enh_wav_out,
                      "resynthesized waveform (invertible domains only)");
  enhance->add_flag("--via-waveform", enh_via_waveform,
                    "route --features-out through the noisy-phase waveform");

  // eval
  std::vector<std::string> eval_checkpoints;
  std::string eval_manifest, eval_report_out;
  CLI::App *eval = app.add_subcommand(
      "eval", "Evaluate checkpoints over a condition-labelled manifest");
  eval->add_option("--checkpoint", eval_checkpoints, "SEPF checkpoint (repeatable)")
      ->required();
  eval->add_option("--manifest", eval_manifest, "evaluation mixture manifest")
      ->required();
  eval->add_option("--report-out", eval_report_out,
                   "report path prefix (writes <prefix>.txt and <prefix>.records.tsv)")
      ->required();

  // inspect
  std::string inspect_path;
  CLI::App *inspect =
      app.add_subcommand("inspect", "Print SEPF/SEPX container headers");
  inspect->add_option("path", inspect_path, "file to inspect")->required();

  try {
    std::vector<std::string> args(argv + 1, argv + argc);
    args = expand_config_args(std::move(args));
    std::reverse(args.begin(), args.end());  // CLI11 wants reversed tokens
    app.parse(args);
  } catch (const CLI::ParseError &e) {
    return app.exit(e);
  } catch (const std::exception &e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }

  try {
    if (*mix) return run_mix(mix_manifest, mix_out_dir);
    if (*train) {
      tc.method = sepfront::method_from_name(train_method);
      return run_train(tc, train_manifest);
    }
    if (*enhance) {
      return run_enhance(enh_checkpoint, enh_in, enh_features_out, enh_wav_out,
                         enh_via_waveform);
    }
    if (*eval) return run_eval(eval_checkpoints, eval_manifest, eval_report_out);
    if (*inspect) return run_inspect(inspect_path);
  } catch (const std::exception &e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
