// Copyright 2026 The TempoWiC-MoE Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Command-line front end: prepare, train, predict, evaluate, ensemble, ablate
// and synth (synthetic data for smoke runs).
//
// Exit codes: 0 success, 1 usage/config error, 2 data error, 3 numeric failure.

#include "tempowic.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#if __has_include("CLI11.hpp")
#include "CLI11.hpp"
#else
#include <CLI/CLI.hpp>
#endif

namespace fs = std::filesystem;
using namespace tempowic;

namespace {

constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitNumeric = 3;

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write " + path.string());
  out << text;
}

std::string report_text(const std::string& split, const CleaningReport& r) {
  std::string s;
  auto kv = [&](const std::string& k, std::size_t v) { s += split + "." + k + "\t" + std::to_string(v) + "\n"; };
  kv("n_input", r.n_input);
  kv("n_kept", r.n_kept);
  kv("n_dropped_bad_span", r.n_dropped_bad_span);
  kv("html_tags", r.substitutions.html_tags);
  kv("html_entities", r.substitutions.html_entities);
  kv("emoji", r.substitutions.emoji);
  kv("mentions", r.substitutions.mentions);
  return s;
}

// --- prepare ---------------------------------------------------------------

struct PrepareArgs {
  std::string format = "tempowic";
  std::string train, dev, test;
  std::string train_labels, dev_labels, test_labels;
  std::string augment_wic, wic_gold;
  std::string out;
};

Dataset load_raw(const PrepareArgs& a, const std::string& path, const std::string& labels) {
  if (a.format == "canonical") return load_canonical(path);
  if (labels.empty()) return load_tempowic(path, std::nullopt);
  return load_tempowic(path, fs::path(labels));
}

int cmd_prepare(const PrepareArgs& a) {
  if (a.format != "tempowic" && a.format != "canonical") throw ConfigError("--format must be tempowic or canonical");
  std::string report;
  struct Split {
    const char* name;
    const std::string& path;
    const std::string& labels;
  };
  for (const Split& s : {Split{"train", a.train, a.train_labels}, Split{"dev", a.dev, a.dev_labels},
                         Split{"test", a.test, a.test_labels}}) {
    if (s.path.empty()) continue;
    auto [kept, rep] = clean_dataset(load_raw(a, s.path, s.labels));
    std::string block = report_text(s.name, rep);
    if (std::string(s.name) == "train" && !a.augment_wic.empty()) {
      // WiC targets are lemmas whose surface forms may be irregular, so the
      // span/word check is not applied to them.
      const auto wic = a.wic_gold.empty() ? load_wic_augmentation(a.augment_wic)
                                          : load_wic_augmentation(a.augment_wic, fs::path(a.wic_gold));
      RuleCounts counts;
      for (const auto& inst : wic.instances) {
        PairInstance c = clean_instance(inst, counts);
        if (c.span1.size() > 0 && c.span2.size() > 0) kept.push_back(std::move(c));
      }
      block += "wic.n_loaded\t" + std::to_string(wic.instances.size()) + "\n";
      block += "wic.n_skipped_index\t" + std::to_string(wic.n_skipped) + "\n";
    }
    save_canonical(kept, fs::path(a.out) / (std::string(s.name) + ".jsonl"));
    std::cout << block;
    report += block;
  }
  write_text(fs::path(a.out) / "prepare_report.tsv", report);
  return 0;
}

// --- train / ablate config ---------------------------------------------------

struct ConfigArgs {
  std::string config;
  std::vector<std::string> overrides;
};

RunConfig load_config(const ConfigArgs& a) {
  RunConfig cfg = a.config.empty() ? RunConfig() : RunConfig::from_file(a.config);
  for (const auto& o : a.overrides) cfg.set(o);
  return cfg;
}

int cmd_train(const ConfigArgs& a) {
  const RunConfig cfg = load_config(a);
  const Dataset train_data = load_canonical(cfg.require_data_path("train"));
  const Dataset dev_data = load_canonical(cfg.require_data_path("dev"));
  ExperimentResult r = run_experiment(cfg, train_data, dev_data, [](const EpochRecord& e) {
    std::printf("epoch %3d  loss %.4f  train_acc %.4f  dev_acc %.4f  dev_macro_f1 %.4f\n", e.epoch, e.train_loss,
                e.train_accuracy, e.dev_accuracy, e.dev_macro_f1);
    std::fflush(stdout);
  });
  for (const auto& rej : r.rejected) std::cerr << "warning: skipped " << rej << '\n';
  const fs::path out = cfg.output_dir();
  save_system(r.system, out / "checkpoint", metrics_json(r.train));
  write_text(out / "history.tsv", history_tsv(r.train.history));
  std::printf("best epoch %d: dev accuracy %.4f, dev macro-F1 %.4f\ncheckpoint written to %s\n", r.train.best_epoch,
              r.train.best_dev.accuracy, r.train.best_dev.macro_f1, (out / "checkpoint").string().c_str());
  return 0;
}

// --- predict / evaluate / ensemble -----------------------------------------

int cmd_predict(const std::string& checkpoint, const std::string& data, const std::string& out) {
  const TrainedSystem sys = load_system(checkpoint);
  const auto preds = predict_dataset(sys, load_canonical(data));
  write_predictions(preds, out);
  std::printf("%zu predictions written to %s\n", preds.size(), out.c_str());
  return 0;
}

// Gold labels from a canonical dataset file or an "id<TAB>label" file.
std::unordered_map<std::string, bool> load_gold(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open gold file " + path.string());
  char first = 0;
  while (in.get(first) && std::isspace(static_cast<unsigned char>(first))) {
  }
  in.close();
  if (first != '{') return load_label_file(path);
  std::unordered_map<std::string, bool> gold;
  for (const auto& inst : load_canonical(path)) gold[inst.id] = inst.label;
  return gold;
}

int cmd_evaluate(const std::string& pred, const std::string& gold, const std::string& out) {
  const MetricsReport r = score(read_predictions(pred), load_gold(gold));
  const std::string text = to_key_value(r);
  std::cout << text;
  if (!out.empty()) write_text(out, text);
  return 0;
}

int cmd_ensemble(const std::vector<std::string>& inputs, const std::string& out, const std::string& average) {
  EnsembleMode mode;
  if (average == "probability") {
    mode = EnsembleMode::kProbability;
  } else if (average == "logit") {
    mode = EnsembleMode::kLogit;
  } else {
    throw ConfigError("--average must be probability or logit");
  }
  std::vector<std::vector<PredictionRecord>> sets;
  for (const auto& p : inputs) sets.push_back(read_predictions(p));
  const auto merged = ensemble(sets, mode);
  write_predictions(merged, out);
  std::printf("averaged %zu prediction sets over %zu ids into %s\n", sets.size(), merged.size(), out.c_str());
  return 0;
}

// --- ablate ----------------------------------------------------------------

int cmd_ablate(const ConfigArgs& a, const std::string& grid, const std::string& out) {
  const RunConfig cfg = load_config(a);
  const Dataset train_data = load_canonical(cfg.require_data_path("train"));
  const Dataset dev_data = load_canonical(cfg.require_data_path("dev"));
  std::vector<AblationGrid> grids;
  if (grid == "all") {
    grids = {AblationGrid::kMoe, AblationGrid::kRepr, AblationGrid::kMatching};
  } else {
    grids = {parse_grid(grid)};
  }
  const fs::path dir = out.empty() ? cfg.output_dir() / "ablation" : fs::path(out);
  for (auto g : grids) {
    const ReportTable table =
        run_grid(g, cfg, train_data, dev_data, [](const std::string& label, const MetricsReport& m) {
          std::fprintf(stderr, "  %-30s acc %.4f  macro-F1 %.4f\n", label.c_str(), m.accuracy, m.macro_f1);
        });
    std::cout << table.text() << '\n';
    write_text(dir / ("ablation_" + std::string(to_string(g)) + ".tsv"), table.tsv());
    write_text(dir / ("ablation_" + std::string(to_string(g)) + ".txt"), table.text());
  }
  return 0;
}

// --- synth -----------------------------------------------------------------

int cmd_synth(const std::string& out, std::size_t n_train, std::size_t n_dev, std::uint64_t seed) {
  SyntheticConfig tr;
  tr.n_instances = n_train;
  tr.seed = seed;
  tr.id_prefix = "train";
  SyntheticConfig dv = tr;
  dv.n_instances = n_dev;
  dv.seed = seed + 1;
  dv.id_prefix = "dev";
  save_canonical(make_synthetic(tr), fs::path(out) / "train.jsonl");
  save_canonical(make_synthetic(dv), fs::path(out) / "dev.jsonl");
  std::printf("wrote %zu train and %zu dev instances to %s\n", n_train, n_dev, out.c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"TempoWiC word-in-context classifier: data preparation, training, prediction, evaluation"};
  app.require_subcommand(1);

  PrepareArgs prep;
  auto* prepare = app.add_subcommand("prepare", "Clean raw splits into canonical files");
  prepare->add_option("--train", prep.train, "Raw training data")->required();
  prepare->add_option("--dev", prep.dev, "Raw dev data");
  prepare->add_option("--test", prep.test, "Raw test data");
  prepare->add_option("--train-labels", prep.train_labels, "id<TAB>label file for --train");
  prepare->add_option("--dev-labels", prep.dev_labels, "id<TAB>label file for --dev");
  prepare->add_option("--test-labels", prep.test_labels, "id<TAB>label file for --test");
  prepare->add_option("--format", prep.format, "Input format: tempowic or canonical");
  prepare->add_option("--augment-wic", prep.augment_wic, "WiC *.data.txt file appended to train");
  prepare->add_option("--wic-gold", prep.wic_gold, "WiC gold file (default: sibling *.gold.txt)");
  prepare->add_option("--out", prep.out, "Output directory")->required();

  ConfigArgs train_cfg;
  auto* train_cmd = app.add_subcommand("train", "Train a model and write checkpoint + history");
  train_cmd->add_option("--config", train_cfg.config, "JSON run config");
  train_cmd->add_option("--set", train_cfg.overrides, "Override, e.g. moe.variant=s_gate (repeatable)");

  std::string ckpt, data, pred_out;
  auto* predict_cmd = app.add_subcommand("predict", "Write predictions for a canonical dataset");
  predict_cmd->add_option("--checkpoint", ckpt, "Checkpoint directory")->required();
  predict_cmd->add_option("--data", data, "Canonical dataset")->required();
  predict_cmd->add_option("--out", pred_out, "Prediction file")->required();

  std::string eval_pred, eval_gold, eval_out;
  auto* evaluate = app.add_subcommand("evaluate", "Score a prediction file against gold labels");
  evaluate->add_option("--pred", eval_pred, "Prediction file")->required();
  evaluate->add_option("--gold", eval_gold, "Canonical dataset or id<TAB>label file")->required();
  evaluate->add_option("--out", eval_out, "Also write the metrics report here");

  std::vector<std::string> ens_inputs;
  std::string ens_out, ens_average = "probability";
  auto* ensemble_cmd = app.add_subcommand("ensemble", "Average prediction files");
  ensemble_cmd->add_option("--inputs", ens_inputs, "Prediction files")->required()->expected(1, -1);
  ensemble_cmd->add_option("--out", ens_out, "Output prediction file")->required();
  ensemble_cmd->add_option("--average", ens_average, "probability (default) or logit");

  ConfigArgs ablate_cfg;
  std::string grid = "all", ablate_out;
  auto* ablate = app.add_subcommand("ablate", "Run ablation grids and print report tables");
  ablate->add_option("--config", ablate_cfg.config, "JSON run config");
  ablate->add_option("--set", ablate_cfg.overrides, "Override (repeatable)");
  ablate->add_option("--grid", grid, "moe, repr, matching or all");
  ablate->add_option("--out", ablate_out, "Directory for table files (default <output_dir>/ablation)");

  std::string synth_out;
  std::size_t n_train = 64, n_dev = 32;
  std::uint64_t synth_seed = 0;
  auto* synth = app.add_subcommand("synth", "Generate a separable synthetic dataset");
  synth->add_option("--out", synth_out, "Output directory")->required();
  synth->add_option("--n-train", n_train, "Training instances");
  synth->add_option("--n-dev", n_dev, "Dev instances");
  synth->add_option("--seed", synth_seed, "Generator seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (*prepare) return cmd_prepare(prep);
    if (*train_cmd) return cmd_train(train_cfg);
    if (*predict_cmd) return cmd_predict(ckpt, data, pred_out);
    if (*evaluate) return cmd_evaluate(eval_pred, eval_gold, eval_out);
    if (*ensemble_cmd) return cmd_ensemble(ens_inputs, ens_out, ens_average);
    if (*ablate) return cmd_ablate(ablate_cfg, grid, ablate_out);
    if (*synth) return cmd_synth(synth_out, n_train, n_dev, synth_seed);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const NumericError& e) {
    std::cerr << "numeric failure: " << e.what() << '\n';
    return kExitNumeric;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return kExitData;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return kExitData;
  } catch (const fs::filesystem_error& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return kExitData;
  }
  return kExitUsage;
}
