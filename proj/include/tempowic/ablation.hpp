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

#include <functional>
#include <nlohmann/json.hpp>
#include <string>
#include <string_view>
#include <vector>

#include "tempowic/config.hpp"
#include "tempowic/evaluation.hpp"
#include "tempowic/pipeline.hpp"

namespace tempowic {

enum class AblationGrid { kMoe, kRepr, kMatching };

inline AblationGrid parse_grid(std::string_view s) {
  if (s == "moe") return AblationGrid::kMoe;
  if (s == "repr") return AblationGrid::kRepr;
  if (s == "matching") return AblationGrid::kMatching;
  throw ConfigError("unknown grid '" + std::string(s) + "' (expected moe, repr or matching)");
}

inline const char* to_string(AblationGrid g) {
  switch (g) {
    case AblationGrid::kMoe:
      return "moe";
    case AblationGrid::kRepr:
      return "repr";
    case AblationGrid::kMatching:
      return "matching";
  }
  return "?";
}

struct GridRow {
  std::string label;
  nlohmann::json overrides;
};

struct GridSpec {
  std::string title;
  std::string label_header;
  std::vector<GridRow> rows;
};

// Row sets of the three ablation tables. The representation and matching grids
// vary one knob of the base model; the MoE grid covers the base model and the
// six gate/expert combinations.
inline GridSpec grid_spec(AblationGrid grid) {
  using nlohmann::json;
  const json base_moe = {{"variant", "none"}, {"use_pos", true}, {"use_glove", true}};
  auto moe = [](const char* variant, bool pos, bool glove) {
    return json{{"moe", {{"variant", variant}, {"use_pos", pos}, {"use_glove", glove}}}};
  };
  switch (grid) {
    case AblationGrid::kMoe:
      return {"MoE-based models (dev)",
              "Model",
              {{"Base", json{{"moe", base_moe}}},
               {"S-Gate + POS + GloVe", moe("s_gate", true, true)},
               {"S-Gate + POS", moe("s_gate", true, false)},
               {"S-Gate + GloVe", moe("s_gate", false, true)},
               {"J-Gate + POS + GloVe", moe("j_gate", true, true)},
               {"J-Gate + POS", moe("j_gate", true, false)},
               {"J-Gate + GloVe", moe("j_gate", false, true)}}};
    case AblationGrid::kRepr:
      return {"Target-word representation (dev)",
              "Target word",
              {{"First", json{{"moe", base_moe}, {"model", {{"repr", "first"}}}}},
               {"Mean", json{{"moe", base_moe}, {"model", {{"repr", "mean"}}}}},
               {"First + Last", json{{"moe", base_moe}, {"model", {{"repr", "first_last"}}}}}}};
    case AblationGrid::kMatching:
      return {"Matching-layer components (dev)",
              "Matching layer",
              {{"E1 + E2", json{{"moe", base_moe}, {"match", {{"use_cls", false}, {"use_diff_prod", false}}}}},
               {"+ E_CLS", json{{"moe", base_moe}, {"match", {{"use_cls", true}, {"use_diff_prod", false}}}}},
               {"+ E_CLS + [E1-E2] + [E1*E2]",
                json{{"moe", base_moe}, {"match", {{"use_cls", true}, {"use_diff_prod", true}}}}}}};
  }
  return {};
}

using RowCallback = std::function<void(const std::string& label, const MetricsReport&)>;

// Trains one model per row on `train_data` and scores it on `dev_data`.
inline ReportTable run_grid(AblationGrid grid, const RunConfig& base, const Dataset& train_data,
                            const Dataset& dev_data, const RowCallback& on_row = {}) {
  const GridSpec spec = grid_spec(grid);
  std::vector<ReportRow> rows;
  for (const auto& row : spec.rows) {
    RunConfig cfg = base;
    cfg.merge(row.overrides);
    ExperimentResult r = run_experiment(cfg, train_data, dev_data);
    rows.push_back({row.label, r.train.best_dev});
    if (on_row) on_row(row.label, r.train.best_dev);
  }
  return report_table(spec.title, spec.label_header, std::move(rows));
}

}  // namespace tempowic
