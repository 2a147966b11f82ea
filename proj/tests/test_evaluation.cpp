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

#include <gtest/gtest.h>

#include <cstdlib>
#include <map>
#include <unordered_map>

#include "test_util.hpp"

namespace tempowic {
namespace {

namespace fs = std::filesystem;

// --- score -------------------------------------------------------------------------

TEST(Score, PerfectPredictions) {
  const auto r = score({true, false, true}, {true, false, true});
  EXPECT_EQ(r.accuracy, 1.0);
  EXPECT_EQ(r.macro_f1, 1.0);
}

TEST(Score, HandExamples) {
  const auto a = score({true, true, false, false}, {true, false, true, false});
  EXPECT_EQ(a.accuracy, 0.5);
  EXPECT_EQ(a.macro_f1, 0.5);
  const auto b = score({true, true}, {true, false});
  EXPECT_EQ(b.accuracy, 0.5);
  EXPECT_NEAR(b.macro_f1, 1.0 / 3.0, 1e-15);
  EXPECT_EQ(b.false_class.f1, 0.0);
}

// Independent confusion-matrix oracle: per-class F1 from explicit counting.
double oracle_macro_f1(const std::vector<bool>& p, const std::vector<bool>& g) {
  double total = 0.0;
  for (bool cls : {true, false}) {
    double tp = 0, pred = 0, act = 0;
    for (std::size_t i = 0; i < p.size(); ++i) {
      tp += (p[i] == cls && g[i] == cls);
      pred += (p[i] == cls);
      act += (g[i] == cls);
    }
    if (pred == 0 || act == 0 || tp == 0) continue;
    const double prec = tp / pred, rec = tp / act;
    total += 2 * prec * rec / (prec + rec);
  }
  return total / 2;
}

TEST(Score, MatchesBruteForceOracle) {
  Rng rng(1);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 1 + rng() % 40;
    std::vector<bool> p(n), g(n);
    for (std::size_t i = 0; i < n; ++i) {
      p[i] = rng() % 2;
      g[i] = rng() % 2;
    }
    const auto r = score(p, g);
    EXPECT_NEAR(r.macro_f1, oracle_macro_f1(p, g), 1e-12);
    std::size_t agree = 0;
    for (std::size_t i = 0; i < n; ++i) agree += p[i] == g[i];
    EXPECT_NEAR(r.accuracy, static_cast<double>(agree) / static_cast<double>(n), 1e-12);
    EXPECT_EQ(r.tp + r.tn + r.fp + r.fn, n);
    EXPECT_GE(r.macro_f1, 0.0);
    EXPECT_LE(r.macro_f1, 1.0);
  }
}

TEST(Score, RejectsMismatchedLengths) {
  EXPECT_THROW(score(std::vector<bool>{true}, std::vector<bool>{true, false}), DataError);
  EXPECT_THROW(score(std::vector<bool>{}, std::vector<bool>{}), DataError);
}

TEST(Score, PredictionRecordsAgainstGoldMap) {
  const std::vector<PredictionRecord> preds{PredictionRecord::from_probability("a", 0.9),
                                            PredictionRecord::from_probability("b", 0.1)};
  const std::unordered_map<std::string, bool> gold{{"a", true}, {"b", true}};
  const auto r = score(preds, gold);
  EXPECT_EQ(r.accuracy, 0.5);
  EXPECT_THROW(score(preds, std::unordered_map<std::string, bool>{{"a", true}, {"c", false}}), DataError);
}

TEST(Score, KeyValueReport) {
  const std::string kv = to_key_value(score({true, true}, {true, false}));
  EXPECT_NE(kv.find("accuracy\t0.500000\n"), std::string::npos) << kv;
  EXPECT_NE(kv.find("macro_f1\t0.333333\n"), std::string::npos) << kv;
}

// --- prediction files ----------------------------------------------------------------

TEST(PredictionFile, RoundTripAndFormat) {
  const auto dir = testing::scratch_dir("pred_io");
  const std::vector<PredictionRecord> preds{PredictionRecord::from_probability("x1", 0.75),
                                            PredictionRecord::from_probability("x2", 0.5),
                                            PredictionRecord::from_probability("x3", 0.1234567)};
  write_predictions(preds, dir / "p.tsv");
  EXPECT_EQ(testing::read_file(dir / "p.tsv"), "x1\t1\t0.750000\nx2\t1\t0.500000\nx3\t0\t0.123457\n");
  const auto back = read_predictions(dir / "p.tsv");
  ASSERT_EQ(back.size(), 3u);
  EXPECT_EQ(back[0], preds[0]);
  EXPECT_EQ(back[2].prob_true, 0.123457);
}

TEST(PredictionFile, MalformedLinesNameTheLine) {
  const auto dir = testing::scratch_dir("pred_bad");
  for (const char* body : {"a\t1\t0.5\nb\t2\t0.5\n", "a\t1\n", "a\t1\t1.5\n", "a\t1\tx\n"}) {
    std::ofstream(dir / "p.tsv", std::ios::trunc) << body;
    EXPECT_THROW(read_predictions(dir / "p.tsv"), DataError) << body;
  }
  std::ofstream(dir / "p.tsv", std::ios::trunc) << "a\t1\t0.5\nb\t2\t0.5\n";
  try {
    read_predictions(dir / "p.tsv");
  } catch (const DataError& e) {
    EXPECT_NE(std::string(e.what()).find(":2:"), std::string::npos) << e.what();
  }
  EXPECT_THROW(read_predictions(dir / "missing.tsv"), DataError);
}

// --- ensemble ----------------------------------------------------------------------

std::vector<PredictionRecord> records(std::initializer_list<std::pair<const char*, double>> v) {
  std::vector<PredictionRecord> out;
  for (const auto& [id, p] : v) out.push_back(PredictionRecord::from_probability(id, p));
  return out;
}

TEST(Ensemble, IdenticalSetsAreIdentity) {
  Rng rng(2);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<PredictionRecord> set;
  for (int i = 0; i < 50; ++i) set.push_back(PredictionRecord::from_probability("i" + std::to_string(i), u(rng)));
  for (std::size_t k : {1u, 2u, 3u, 5u, 7u}) {
    EXPECT_EQ(ensemble(std::vector(k, set)), set) << k;
  }
}

TEST(Ensemble, HandArithmetic) {
  const auto a = ensemble({records({{"x", 0.8}}), records({{"x", 0.4}})});
  EXPECT_NEAR(a[0].prob_true, 0.6, 1e-15);
  EXPECT_TRUE(a[0].predicted);
  const auto b = ensemble({records({{"x", 0.9}}), records({{"x", 0.2}}), records({{"x", 0.2}})});
  EXPECT_NEAR(b[0].prob_true, 1.3 / 3.0, 1e-15);
  EXPECT_FALSE(b[0].predicted);
}

TEST(Ensemble, InvariantToSetAndRecordOrder) {
  Rng rng(3);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<std::vector<PredictionRecord>> sets(4);
  for (auto& s : sets) {
    for (int i = 0; i < 20; ++i) s.push_back(PredictionRecord::from_probability("i" + std::to_string(i), u(rng)));
  }
  const auto base = ensemble(sets);
  auto permuted = sets;
  std::reverse(permuted.begin(), permuted.end());
  std::shuffle(permuted[1].begin(), permuted[1].end(), rng);
  std::swap(permuted[0], permuted[2]);
  auto out = ensemble(permuted);
  std::map<std::string, double> m;
  for (const auto& r : out) m[r.id] = r.prob_true;
  for (const auto& r : base) EXPECT_EQ(m.at(r.id), r.prob_true);
}

TEST(Ensemble, LogitAveraging) {
  const auto r = ensemble({records({{"x", 0.9}}), records({{"x", 0.1}})}, EnsembleMode::kLogit);
  EXPECT_NEAR(r[0].prob_true, 0.5, 1e-12);
  const auto s = ensemble({records({{"x", 0.9}}), records({{"x", 0.9}})}, EnsembleMode::kLogit);
  EXPECT_NEAR(s[0].prob_true, 0.9, 1e-12);
}

TEST(Ensemble, MismatchedIdsAreNamed) {
  try {
    ensemble({records({{"a", 0.1}, {"b", 0.2}, {"c", 0.3}}), records({{"a", 0.1}, {"c", 0.3}})});
    FAIL() << "expected DataError";
  } catch (const DataError& e) {
    EXPECT_NE(std::string(e.what()).find("b"), std::string::npos) << e.what();
  }
  try {
    ensemble({records({{"a", 0.1}}), records({{"a", 0.1}, {"zz", 0.3}})});
    FAIL() << "expected DataError";
  } catch (const DataError& e) {
    EXPECT_NE(std::string(e.what()).find("zz"), std::string::npos) << e.what();
  }
  EXPECT_THROW(ensemble({}), DataError);
}

// --- report tables -----------------------------------------------------------------

MetricsReport metrics(double acc, double f1) {
  MetricsReport m;
  m.accuracy = acc;
  m.macro_f1 = f1;
  return m;
}

TEST(ReportTable, SingleRun) {
  const auto t = report_table("t", "Model", {{"Base", metrics(0.75, 0.5)}});
  EXPECT_EQ(t.tsv(), "Model\tAccuracy\tmacro-F1\nBase\t0.750000\t0.500000\n");
  EXPECT_NE(t.text().find("75.00%"), std::string::npos);
}

TEST(ReportTable, PreservesRowOrder) {
  const std::vector<std::string> labels{"S-Gate + POS + GloVe", "S-Gate + POS", "S-Gate + GloVe",
                                        "J-Gate + POS + GloVe", "J-Gate + POS", "J-Gate + GloVe"};
  std::vector<ReportRow> rows;
  for (std::size_t i = 0; i < labels.size(); ++i) rows.push_back({labels[i], metrics(0.1 * static_cast<double>(i), 0)});
  const auto t = report_table("MoE", "Model", rows);
  std::istringstream in(t.tsv());
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "Model\tAccuracy\tmacro-F1");
  for (const auto& l : labels) {
    std::getline(in, line);
    EXPECT_EQ(line.substr(0, line.find('\t')), l);
  }
  EXPECT_FALSE(std::getline(in, line));
}

TEST(ReportTable, EmptyRunListThrows) { EXPECT_THROW(report_table("t", "Model", {}), DataError); }

// --- ablation grids ----------------------------------------------------------------

std::vector<std::string> labels_of(AblationGrid g) {
  std::vector<std::string> out;
  for (const auto& r : grid_spec(g).rows) out.push_back(r.label);
  return out;
}

TEST(AblationGrid, RowLabelsAndHeaders) {
  EXPECT_EQ(labels_of(AblationGrid::kMoe),
            (std::vector<std::string>{"Base", "S-Gate + POS + GloVe", "S-Gate + POS", "S-Gate + GloVe",
                                      "J-Gate + POS + GloVe", "J-Gate + POS", "J-Gate + GloVe"}));
  EXPECT_EQ(labels_of(AblationGrid::kRepr), (std::vector<std::string>{"First", "Mean", "First + Last"}));
  EXPECT_EQ(labels_of(AblationGrid::kMatching),
            (std::vector<std::string>{"E1 + E2", "+ E_CLS", "+ E_CLS + [E1-E2] + [E1*E2]"}));
  EXPECT_EQ(grid_spec(AblationGrid::kMoe).label_header, "Model");
  EXPECT_EQ(grid_spec(AblationGrid::kRepr).label_header, "Target word");
  EXPECT_EQ(grid_spec(AblationGrid::kMatching).label_header, "Matching layer");
  EXPECT_THROW(parse_grid("all"), ConfigError);
}

TEST(AblationGrid, EveryRowIsAValidConfig) {
  for (AblationGrid g : {AblationGrid::kMoe, AblationGrid::kRepr, AblationGrid::kMatching}) {
    for (const auto& row : grid_spec(g).rows) {
      RunConfig cfg;
      EXPECT_NO_THROW(cfg.merge(row.overrides)) << row.label;
    }
  }
  RunConfig cfg;
  cfg.merge(grid_spec(AblationGrid::kMoe).rows[3].overrides);
  const auto m = cfg.model(10);
  EXPECT_EQ(m.variant, GateVariant::kSeparate);
  EXPECT_FALSE(m.use_pos);
  EXPECT_TRUE(m.use_glove);
}

// --- run configuration -------------------------------------------------------------

TEST(RunConfig, DefaultsMatchTrainingDefaults) {
  const RunConfig cfg;
  const auto t = cfg.train();
  EXPECT_EQ(t.batch_size, 8u);
  EXPECT_EQ(t.lr_encoder, 1e-6);
  EXPECT_EQ(t.lr_bilstm, 1e-4);
  EXPECT_EQ(t.warmup_ratio, 0.1);
  EXPECT_EQ(t.fgm.epsilon, 1.0);
  EXPECT_TRUE(t.fgm.enabled);
  EXPECT_EQ(cfg.model(10).bilstm_hidden, 1024);
}

TEST(RunConfig, SetOverridesAndRejectsBadInput) {
  RunConfig cfg;
  cfg.set("train.epochs=3");
  cfg.set("moe.variant=j_gate");
  cfg.set("fgm.enabled=false");
  cfg.set("train.lr_encoder=2e-5");
  EXPECT_EQ(cfg.train().epochs, 3);
  EXPECT_EQ(cfg.model(10).variant, GateVariant::kJoint);
  EXPECT_FALSE(cfg.train().fgm.enabled);
  EXPECT_EQ(cfg.train().lr_encoder, 2e-5);
  const auto before = cfg.json();
  EXPECT_THROW(cfg.set("train.epoch=3"), ConfigError);
  EXPECT_THROW(cfg.set("train.epochs=three"), ConfigError);
  EXPECT_THROW(cfg.set("train.epochs=2.5"), ConfigError);
  EXPECT_THROW(cfg.set("train.epochs"), ConfigError);
  EXPECT_THROW(cfg.set("moe.variant=k_gate"), ConfigError);
  EXPECT_THROW(cfg.set("model.d=7"), ConfigError);
  EXPECT_THROW(cfg.set("train.warmup_ratio=1.0"), ConfigError);
  EXPECT_EQ(cfg.json(), before);
}

TEST(RunConfig, FileLayer) {
  const auto dir = testing::scratch_dir("config_file");
  std::ofstream(dir / "c.json") << R"({"train": {"epochs": 7}, "moe": {"variant": "s_gate"}})";
  const auto cfg = RunConfig::from_file(dir / "c.json");
  EXPECT_EQ(cfg.train().epochs, 7);
  EXPECT_EQ(cfg.model(10).variant, GateVariant::kSeparate);
  std::ofstream(dir / "bad.json") << R"({"train": {"epochs": 7,}})";
  EXPECT_THROW(RunConfig::from_file(dir / "bad.json"), ConfigError);
  EXPECT_THROW(RunConfig::from_file(dir / "none.json"), ConfigError);
}

TEST(RunConfig, DataDirectoryEnvironment) {
  RunConfig cfg;
  cfg.set("data.train=splits/train.jsonl");
  cfg.set("data.dev=/abs/dev.jsonl");
  ::setenv(kDataDirEnv, "/data/root", 1);
  EXPECT_EQ(cfg.data_path("train"), fs::path("/data/root/splits/train.jsonl"));
  EXPECT_EQ(cfg.data_path("dev"), fs::path("/abs/dev.jsonl"));
  EXPECT_EQ(cfg.data_path("test"), fs::path());
  EXPECT_THROW(cfg.require_data_path("test"), ConfigError);
  ::unsetenv(kDataDirEnv);
  EXPECT_EQ(cfg.data_path("train"), fs::path("splits/train.jsonl"));
}

}  // namespace
}  // namespace tempowic
