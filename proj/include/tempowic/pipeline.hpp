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

#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <memory>
#include <string>
#include <vector>

#include "tempowic/checkpoint.hpp"
#include "tempowic/config.hpp"
#include "tempowic/data.hpp"
#include "tempowic/evaluation.hpp"
#include "tempowic/lexical.hpp"
#include "tempowic/model.hpp"
#include "tempowic/tokenization.hpp"
#include "tempowic/training.hpp"

namespace tempowic {

// Scalar type of trained models. float32 matches the checkpoint payload, so a
// save/load round trip is exact.
using Real = float;
using Model = TempoWicModel<Real>;

inline constexpr const char* kVocabName = "vocab.txt";

struct TrainedSystem {
  RunConfig config;
  Vocabulary vocab;
  std::shared_ptr<const Featurizer> featurizer;
  std::unique_ptr<Model> model;
};

struct Featurized {
  std::vector<ModelInput> inputs;
  std::vector<std::string> rejected;  // "id: reason"
};

// Instances that cannot be laid out (e.g. a target lost to truncation) are
// listed in `rejected` instead of being altered.
inline Featurized featurize(const Featurizer& featurizer, const Dataset& data) {
  Featurized out;
  for (const auto& inst : data) {
    try {
      out.inputs.push_back(featurizer(inst));
    } catch (const DataError& e) {
      out.rejected.push_back(inst.id + ": " + e.what());
    }
  }
  return out;
}

inline PosTagger make_tagger(const RunConfig& cfg) {
  const auto lexicon = cfg.data_path("pos_lexicon");
  return lexicon.empty() ? PosTagger() : PosTagger::with_lexicon_file(lexicon);
}

inline TrainedSystem assemble(const RunConfig& cfg, Vocabulary vocab) {
  TrainedSystem sys;
  sys.config = cfg;
  sys.vocab = std::move(vocab);
  auto tokenizer = std::make_shared<WhitespaceTokenizer>(sys.vocab);
  sys.featurizer = std::make_shared<Featurizer>(tokenizer, sys.vocab, make_tagger(cfg), cfg.train().max_len);
  sys.model = std::make_unique<Model>(cfg.model(static_cast<int>(sys.vocab.size())));
  return sys;
}

// Builds the vocabulary from the training split and a freshly initialized
// model; word-expert rows are seeded from static vectors when configured.
inline TrainedSystem build_system(const RunConfig& cfg, const Dataset& train_data) {
  TrainedSystem sys = assemble(cfg, Vocabulary::build(corpus_tokens(train_data), cfg.vocab_min_count()));
  const ModelConfig mc = sys.model->config();
  const auto glove = cfg.data_path("glove");
  if (mc.moe() && mc.use_glove && !glove.empty()) {
    const auto table = StaticEmbeddingTable::load(glove, static_cast<std::size_t>(mc.glove_dim), cfg.glove_oov(),
                                                  derive_seed(cfg.seed(), 303));
    sys.model->init_word_vectors(sys.vocab, table);
  }
  return sys;
}

struct ExperimentResult {
  TrainedSystem system;
  TrainResult<Real> train;
  std::vector<std::string> rejected;
};

inline ExperimentResult run_experiment(const RunConfig& cfg, const Dataset& train_data, const Dataset& dev_data,
                                       const EpochCallback& on_epoch = {}) {
  ExperimentResult r{build_system(cfg, train_data), {}, {}};
  Featurized tr = featurize(*r.system.featurizer, train_data);
  Featurized dv = featurize(*r.system.featurizer, dev_data);
  r.rejected = tr.rejected;
  r.rejected.insert(r.rejected.end(), dv.rejected.begin(), dv.rejected.end());
  r.train = train(*r.system.model, tr.inputs, dv.inputs, cfg.train(), on_epoch);
  return r;
}

inline nlohmann::json metrics_json(const TrainResult<Real>& result) {
  return {{"best_epoch", result.best_epoch},
          {"dev_accuracy", result.best_dev.accuracy},
          {"dev_macro_f1", result.best_dev.macro_f1},
          {"epochs_run", result.history.size()}};
}

inline void save_system(const TrainedSystem& sys, const std::filesystem::path& dir,
                        const nlohmann::json& metrics = nlohmann::json::object()) {
  save_checkpoint(dir, sys.model->parameters(), sys.config.json(), metrics);
  sys.vocab.save(dir / kVocabName);
}

inline TrainedSystem load_system(const std::filesystem::path& dir) {
  const auto manifest = read_manifest(dir);
  TrainedSystem sys = assemble(RunConfig::from_json(manifest.at("config")), Vocabulary::load(dir / kVocabName));
  load_checkpoint(dir, sys.model->parameters());
  return sys;
}

inline std::vector<PredictionRecord> predict_dataset(const TrainedSystem& sys, const Dataset& data) {
  Featurized f = featurize(*sys.featurizer, data);
  if (!f.rejected.empty()) throw DataError("cannot predict instance " + f.rejected.front());
  return predict(*sys.model, f.inputs);
}

// Per-epoch history as TSV; values printed with round-trip precision so two
// runs can be compared byte for byte.
inline std::string history_tsv(const std::vector<EpochRecord>& history) {
  std::string out = "epoch\ttrain_loss\tadversarial_loss\ttrain_accuracy\tdev_accuracy\tdev_macro_f1\n";
  char buf[256];
  for (const auto& r : history) {
    std::snprintf(buf, sizeof(buf), "%d\t%.17g\t%.17g\t%.17g\t%.17g\t%.17g\n", r.epoch, r.train_loss,
                  r.adversarial_loss, r.train_accuracy, r.dev_accuracy, r.dev_macro_f1);
    out += buf;
  }
  return out;
}

}  // namespace tempowic
