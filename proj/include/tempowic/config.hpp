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

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <nlohmann/json.hpp>
#include <string>
#include <string_view>
#include <vector>

#include "tempowic/adversarial.hpp"
#include "tempowic/lexical.hpp"
#include "tempowic/model.hpp"
#include "tempowic/training.hpp"

namespace tempowic {

// Environment variable naming the directory that relative data paths are
// resolved against.
inline constexpr const char* kDataDirEnv = "TEMPOWIC_DATA_DIR";

inline nlohmann::json default_run_config() {
  return nlohmann::json::parse(R"({
    "data": {"train": "", "dev": "", "test": "", "glove": "", "pos_lexicon": ""},
    "model": {
      "repr": "first_last", "d": 64, "n_layers": 2, "mlp_hidden": 256,
      "bilstm_hidden": 1024, "pos_dim": 32, "glove_dim": 50, "task_dim": 64,
      "vocab_min_count": 1, "glove_oov": "zero"
    },
    "moe": {"variant": "none", "use_pos": true, "use_glove": true},
    "match": {"use_cls": true, "use_diff_prod": true},
    "train": {
      "batch_size": 8, "max_len": 256, "lr_encoder": 1e-6, "lr_bilstm": 1e-4,
      "warmup_ratio": 0.1, "epochs": 20, "patience": 5, "weight_decay": 0.01
    },
    "fgm": {"enabled": true, "epsilon": 1.0, "norm_scope": "global", "perturb_experts": false},
    "output_dir": "runs/default",
    "seed": 42
  })");
}

namespace detail {

inline bool same_kind(const nlohmann::json& a, const nlohmann::json& b) {
  if (a.is_number() && b.is_number()) {
    return !(a.is_number_integer() && b.is_number_float());  // no float into an integer key
  }
  return a.type() == b.type();
}

inline void merge_into(nlohmann::json& base, const nlohmann::json& patch, const std::string& prefix) {
  if (!patch.is_object()) throw ConfigError("config section '" + prefix + "' must be an object");
  for (const auto& [key, value] : patch.items()) {
    const std::string path = prefix.empty() ? key : prefix + "." + key;
    auto it = base.find(key);
    if (it == base.end()) throw ConfigError("unknown config key '" + path + "'");
    if (it->is_object()) {
      merge_into(*it, value, path);
    } else if (!same_kind(*it, value)) {
      throw ConfigError("config key '" + path + "' expects " + std::string(it->type_name()) + ", got " +
                        std::string(value.type_name()));
    } else {
      *it = value;
    }
  }
}

}  // namespace detail

// Layered run configuration: defaults, then a config file, then --set
// overrides. Unknown keys and type mismatches are rejected.
class RunConfig {
 public:
  RunConfig() : j_(default_run_config()) {}

  static RunConfig from_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open config " + path.string());
    nlohmann::json patch;
    try {
      patch = nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
      throw ConfigError("config " + path.string() + ": " + e.what());
    }
    RunConfig cfg;
    cfg.merge(patch);
    return cfg;
  }

  static RunConfig from_json(const nlohmann::json& patch) {
    RunConfig cfg;
    cfg.merge(patch);
    return cfg;
  }

  // Applies `patch` atomically: on error the configuration is unchanged.
  void merge(const nlohmann::json& patch) {
    RunConfig next(*this);
    detail::merge_into(next.j_, patch, "");
    next.validate();
    j_ = std::move(next.j_);
  }

  // "section.key=value"; the value is parsed as JSON when possible, otherwise
  // taken as a string.
  void set(std::string_view assignment) {
    const auto eq = assignment.find('=');
    if (eq == std::string_view::npos) throw ConfigError("override '" + std::string(assignment) + "' is not key=value");
    const std::string key(assignment.substr(0, eq));
    const std::string raw(assignment.substr(eq + 1));
    nlohmann::json value;
    try {
      value = nlohmann::json::parse(raw);
    } catch (const nlohmann::json::parse_error&) {
      value = raw;
    }
    nlohmann::json patch = value;
    std::string rest = key;
    std::vector<std::string> parts;
    for (std::size_t pos; (pos = rest.find('.')) != std::string::npos; rest = rest.substr(pos + 1)) {
      parts.push_back(rest.substr(0, pos));
    }
    parts.push_back(rest);
    for (auto it = parts.rbegin(); it != parts.rend(); ++it) patch = nlohmann::json{{*it, patch}};
    merge(patch);
  }

  const nlohmann::json& json() const { return j_; }

  ModelConfig model(int vocab_size) const {
    ModelConfig m;
    const auto& mj = j_.at("model");
    m.vocab_size = vocab_size;
    m.d = mj.at("d").get<int>();
    m.n_layers = mj.at("n_layers").get<int>();
    m.repr = parse_repr_mode(mj.at("repr").get<std::string>());
    m.mlp_hidden = mj.at("mlp_hidden").get<int>();
    m.bilstm_hidden = mj.at("bilstm_hidden").get<int>();
    m.pos_dim = mj.at("pos_dim").get<int>();
    m.glove_dim = mj.at("glove_dim").get<int>();
    m.task_dim = mj.at("task_dim").get<int>();
    m.variant = parse_gate_variant(j_.at("moe").at("variant").get<std::string>());
    m.use_pos = j_.at("moe").at("use_pos").get<bool>();
    m.use_glove = j_.at("moe").at("use_glove").get<bool>();
    m.match.use_cls = j_.at("match").at("use_cls").get<bool>();
    m.match.use_diff_prod = j_.at("match").at("use_diff_prod").get<bool>();
    m.seed = seed();
    return m;
  }

  TrainConfig train() const {
    TrainConfig t;
    const auto& tj = j_.at("train");
    t.batch_size = tj.at("batch_size").get<std::size_t>();
    t.max_len = tj.at("max_len").get<std::size_t>();
    t.lr_encoder = tj.at("lr_encoder").get<double>();
    t.lr_bilstm = tj.at("lr_bilstm").get<double>();
    t.warmup_ratio = tj.at("warmup_ratio").get<double>();
    t.epochs = tj.at("epochs").get<int>();
    t.early_stop_patience = tj.at("patience").get<int>();
    t.weight_decay = tj.at("weight_decay").get<double>();
    const auto& fj = j_.at("fgm");
    t.fgm.enabled = fj.at("enabled").get<bool>();
    t.fgm.epsilon = fj.at("epsilon").get<double>();
    t.fgm.norm_scope = parse_norm_scope(fj.at("norm_scope").get<std::string>());
    t.fgm.perturb_experts = fj.at("perturb_experts").get<bool>();
    t.seed = seed();
    return t;
  }

  std::uint64_t seed() const { return j_.at("seed").get<std::uint64_t>(); }
  std::size_t vocab_min_count() const { return j_.at("model").at("vocab_min_count").get<std::size_t>(); }
  OovPolicy glove_oov() const {
    return j_.at("model").at("glove_oov").get<std::string>() == "random" ? OovPolicy::kRandomNormal : OovPolicy::kZero;
  }
  std::filesystem::path output_dir() const { return j_.at("output_dir").get<std::string>(); }

  // Data path for "train", "dev", "test", "glove" or "pos_lexicon"; empty if
  // unset. Relative paths resolve against $TEMPOWIC_DATA_DIR when it is set.
  std::filesystem::path data_path(const std::string& key) const {
    const std::string p = j_.at("data").at(key).get<std::string>();
    if (p.empty()) return {};
    std::filesystem::path path(p);
    if (path.is_relative()) {
      if (const char* base = std::getenv(kDataDirEnv); base && *base) return std::filesystem::path(base) / path;
    }
    return path;
  }

  std::filesystem::path require_data_path(const std::string& key) const {
    auto p = data_path(key);
    if (p.empty()) throw ConfigError("data." + key + " must be set");
    return p;
  }

 private:
  void validate() const {
    for (const char* key : {"batch_size", "max_len", "epochs", "patience"}) {
      if (j_.at("train").at(key).get<long long>() <= 0)
        throw ConfigError(std::string("train.") + key + " must be positive");
    }
    model(kNumReserved);
    train().validate();
    const auto& mj = j_.at("model");
    const std::string oov = mj.at("glove_oov").get<std::string>();
    if (oov != "zero" && oov != "random") throw ConfigError("model.glove_oov must be zero or random");
    for (const char* key : {"d", "n_layers", "mlp_hidden", "bilstm_hidden", "pos_dim", "glove_dim", "task_dim"}) {
      if (mj.at(key).get<long long>() <= 0) throw ConfigError(std::string("model.") + key + " must be positive");
    }
    if (mj.at("d").get<int>() % 2 != 0) throw ConfigError("model.d must be even");
    if (j_.at("train").at("max_len").get<long long>() < 3) throw ConfigError("train.max_len must be at least 3");
    const auto& moe = j_.at("moe");
    if (moe.at("variant").get<std::string>() != "none" && !moe.at("use_pos").get<bool>() &&
        !moe.at("use_glove").get<bool>()) {
      throw ConfigError("moe.variant requires moe.use_pos or moe.use_glove");
    }
  }

  nlohmann::json j_;
};

}  // namespace tempowic
