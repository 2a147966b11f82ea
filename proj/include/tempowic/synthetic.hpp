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

#include <cstdint>
#include <cstdio>
#include <string>
#include <vector>

#include "tempowic/core.hpp"
#include "tempowic/data.hpp"

namespace tempowic {

// Separable toy WiC data. Each pseudo-word has two senses, each realized by
// its own pool of context words; the pools are pairwise disjoint, so whether
// two contexts come from the same sense is fully determined by their words.
struct SyntheticConfig {
  std::size_t n_instances = 64;
  std::size_t n_words = 8;
  std::size_t pool_size = 6;
  std::size_t context_len = 5;
  std::uint64_t seed = 0;
  std::string id_prefix = "syn";
};

inline std::string synthetic_word(std::size_t k) { return "lex" + std::to_string(k); }

inline std::string synthetic_context_word(std::size_t k, int sense, std::size_t j) {
  return "ctx" + std::to_string(k) + (sense == 0 ? "a" : "b") + std::to_string(j);
}

inline Dataset make_synthetic(const SyntheticConfig& cfg) {
  if (cfg.n_words == 0 || cfg.pool_size == 0 || cfg.context_len == 0) {
    throw ConfigError("synthetic generator sizes must be positive");
  }
  Rng rng(derive_seed(cfg.seed, 4242));
  auto pick = [&](std::size_t n) { return static_cast<std::size_t>(rng() % n); };

  auto make_text = [&](std::size_t k, int sense, Span& span) {
    const std::string target = synthetic_word(k);
    const std::size_t at = pick(cfg.context_len + 1);
    std::string text;
    for (std::size_t i = 0; i <= cfg.context_len; ++i) {
      if (!text.empty()) text += ' ';
      if (i == at) {
        span.begin = text.size();  // ASCII, so bytes == code points
        text += target;
        span.end = text.size();
      } else {
        text += synthetic_context_word(k, sense, pick(cfg.pool_size));
      }
    }
    return text;
  };

  Dataset out;
  for (std::size_t n = 0; n < cfg.n_instances; ++n) {
    const std::size_t k = n % cfg.n_words;
    const bool same = pick(2) == 0;
    const int s1 = static_cast<int>(pick(2));
    const int s2 = same ? s1 : 1 - s1;
    PairInstance inst;
    char id[32];
    std::snprintf(id, sizeof(id), "%s-%04zu", cfg.id_prefix.c_str(), n);
    inst.id = id;
    inst.word = synthetic_word(k);
    inst.text1 = make_text(k, s1, inst.span1);
    inst.text2 = make_text(k, s2, inst.span2);
    inst.date1 = "2019-06-01";
    inst.date2 = "2020-06-01";
    inst.label = same;
    out.push_back(std::move(inst));
  }
  return out;
}

}  // namespace tempowic
