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

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <numeric>
#include <sstream>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "tempowic/errors.hpp"

namespace tempowic {

inline constexpr double kDecisionThreshold = 0.5;

struct PredictionRecord {
  std::string id;
  double prob_true = 0.0;
  bool predicted = false;

  static PredictionRecord from_probability(std::string id, double p) {
    return {std::move(id), p, p >= kDecisionThreshold};
  }
  bool operator==(const PredictionRecord&) const = default;
};

struct ClassMetrics {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

struct MetricsReport {
  std::size_t n = 0;
  std::size_t tp = 0;  // True is the positive class
  std::size_t tn = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;
  double accuracy = 0.0;
  double macro_f1 = 0.0;
  ClassMetrics true_class;
  ClassMetrics false_class;
};

namespace detail {

// Precision or recall with an empty denominator is undefined; F1 is then 0.
inline ClassMetrics class_metrics(std::size_t hit, std::size_t predicted, std::size_t actual) {
  ClassMetrics m;
  const bool p_defined = predicted > 0;
  const bool r_defined = actual > 0;
  if (p_defined) m.precision = static_cast<double>(hit) / static_cast<double>(predicted);
  if (r_defined) m.recall = static_cast<double>(hit) / static_cast<double>(actual);
  if (p_defined && r_defined && m.precision + m.recall > 0.0) {
    m.f1 = 2.0 * m.precision * m.recall / (m.precision + m.recall);
  }
  return m;
}

}  // namespace detail

inline MetricsReport score(const std::vector<bool>& preds, const std::vector<bool>& golds) {
  if (preds.size() != golds.size()) {
    throw DataError("score: " + std::to_string(preds.size()) + " predictions vs " + std::to_string(golds.size()) +
                    " gold labels");
  }
  if (preds.empty()) throw DataError("score: no predictions");
  MetricsReport r;
  r.n = preds.size();
  for (std::size_t i = 0; i < preds.size(); ++i) {
    if (preds[i] && golds[i]) ++r.tp;
    if (!preds[i] && !golds[i]) ++r.tn;
    if (preds[i] && !golds[i]) ++r.fp;
    if (!preds[i] && golds[i]) ++r.fn;
  }
  r.accuracy = static_cast<double>(r.tp + r.tn) / static_cast<double>(r.n);
  r.true_class = detail::class_metrics(r.tp, r.tp + r.fp, r.tp + r.fn);
  r.false_class = detail::class_metrics(r.tn, r.tn + r.fn, r.tn + r.fp);
  r.macro_f1 = (r.true_class.f1 + r.false_class.f1) / 2.0;
  return r;
}

// Scores predictions against gold labels keyed by id.
inline MetricsReport score(const std::vector<PredictionRecord>& preds,
                           const std::unordered_map<std::string, bool>& gold) {
  std::vector<bool> p;
  std::vector<bool> g;
  for (const auto& rec : preds) {
    auto it = gold.find(rec.id);
    if (it == gold.end()) throw DataError("score: no gold label for id " + rec.id);
    p.push_back(rec.predicted);
    g.push_back(it->second);
  }
  if (preds.size() != gold.size()) {
    throw DataError("score: " + std::to_string(preds.size()) + " predictions vs " + std::to_string(gold.size()) +
                    " gold labels");
  }
  return score(p, g);
}

inline std::string format_fixed(double v, int decimals) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", decimals, v);
  return buf;
}

// Structured key-value rendering, one "key<TAB>value" per line.
inline std::string to_key_value(const MetricsReport& r) {
  std::ostringstream out;
  auto kv = [&](const char* k, const std::string& v) { out << k << '\t' << v << '\n'; };
  kv("n", std::to_string(r.n));
  kv("accuracy", format_fixed(r.accuracy, 6));
  kv("macro_f1", format_fixed(r.macro_f1, 6));
  kv("true.precision", format_fixed(r.true_class.precision, 6));
  kv("true.recall", format_fixed(r.true_class.recall, 6));
  kv("true.f1", format_fixed(r.true_class.f1, 6));
  kv("false.precision", format_fixed(r.false_class.precision, 6));
  kv("false.recall", format_fixed(r.false_class.recall, 6));
  kv("false.f1", format_fixed(r.false_class.f1, 6));
  kv("tp", std::to_string(r.tp));
  kv("tn", std::to_string(r.tn));
  kv("fp", std::to_string(r.fp));
  kv("fn", std::to_string(r.fn));
  return out.str();
}

// ---------------------------------------------------------------------------
// Prediction files: "id<TAB>predicted(0/1)<TAB>prob_true" with 6 decimals.
// ---------------------------------------------------------------------------

inline void write_predictions(const std::vector<PredictionRecord>& preds, const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write " + path.string());
  for (const auto& p : preds)
    out << p.id << '\t' << (p.predicted ? 1 : 0) << '\t' << format_fixed(p.prob_true, 6) << '\n';
}

inline std::vector<PredictionRecord> read_predictions(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open prediction file " + path.string());
  std::vector<PredictionRecord> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto t1 = line.find('\t');
    const auto t2 = t1 == std::string::npos ? t1 : line.find('\t', t1 + 1);
    auto fail = [&] {
      throw DataError(path.string() + ":" + std::to_string(line_no) + ": expected id<TAB>0|1<TAB>prob");
    };
    if (t2 == std::string::npos) fail();
    const std::string pred = line.substr(t1 + 1, t2 - t1 - 1);
    if (pred != "0" && pred != "1") fail();
    PredictionRecord rec;
    rec.id = line.substr(0, t1);
    rec.predicted = pred == "1";
    try {
      std::size_t used = 0;
      const std::string prob = line.substr(t2 + 1);
      rec.prob_true = std::stod(prob, &used);
      if (used != prob.size()) fail();
    } catch (const std::logic_error&) {
      fail();
    }
    if (!(rec.prob_true >= 0.0 && rec.prob_true <= 1.0)) fail();
    out.push_back(std::move(rec));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Ensembling
// ---------------------------------------------------------------------------

enum class EnsembleMode { kProbability, kLogit };

namespace detail {

inline double logit(double p) {
  const double q = std::clamp(p, 1e-12, 1.0 - 1e-12);
  return std::log(q / (1.0 - q));
}

// Sums in sorted order so that the result is independent of input order.
// Offsets from the minimum keep the mean of equal values exactly equal to them.
inline double ordered_mean(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const double base = v.front();
  double s = 0.0;
  for (double x : v) s += x - base;
  return base + s / static_cast<double>(v.size());
}

}  // namespace detail

// Averages per-id scores over K prediction sets and thresholds at 0.5. Output
// follows the record order of the first set.
inline std::vector<PredictionRecord> ensemble(const std::vector<std::vector<PredictionRecord>>& sets,
                                              EnsembleMode mode = EnsembleMode::kProbability) {
  if (sets.empty()) throw DataError("ensemble: no prediction sets");
  std::map<std::string, std::vector<double>> values;
  for (const auto& rec : sets.front()) {
    if (!values.emplace(rec.id, std::vector<double>{}).second) throw DataError("ensemble: duplicate id " + rec.id);
  }
  for (std::size_t k = 0; k < sets.size(); ++k) {
    std::unordered_set<std::string> seen;
    for (const auto& rec : sets[k]) {
      auto it = values.find(rec.id);
      if (it == values.end())
        throw DataError("ensemble: id " + rec.id + " in set " + std::to_string(k + 1) + " missing from set 1");
      if (!seen.insert(rec.id).second)
        throw DataError("ensemble: duplicate id " + rec.id + " in set " + std::to_string(k + 1));
      it->second.push_back(mode == EnsembleMode::kLogit ? detail::logit(rec.prob_true) : rec.prob_true);
    }
    if (seen.size() != values.size()) {
      std::string missing;
      for (const auto& [id, v] : values) {
        if (!seen.count(id)) missing += (missing.empty() ? "" : ", ") + id;
      }
      throw DataError("ensemble: set " + std::to_string(k + 1) + " is missing ids: " + missing);
    }
  }
  std::vector<PredictionRecord> out;
  out.reserve(sets.front().size());
  for (const auto& rec : sets.front()) {
    double p = detail::ordered_mean(values.at(rec.id));
    if (mode == EnsembleMode::kLogit) p = 1.0 / (1.0 + std::exp(-p));
    out.push_back(PredictionRecord::from_probability(rec.id, p));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Report tables
// ---------------------------------------------------------------------------

struct ReportRow {
  std::string label;
  MetricsReport metrics;
};

struct ReportTable {
  std::string title;
  std::string label_header;
  std::vector<ReportRow> rows;

  std::vector<std::string> column_headers() const { return {label_header, "Accuracy", "macro-F1"}; }

  static std::string percent(double v) { return format_fixed(100.0 * v, 2) + "%"; }

  // Aligned plain-text rendering.
  std::string text() const {
    std::size_t w0 = label_header.size();
    for (const auto& r : rows) w0 = std::max(w0, r.label.size());
    const std::size_t w = 10;
    auto pad = [](const std::string& s, std::size_t n) {
      return s + std::string(n > s.size() ? n - s.size() : 0, ' ');
    };
    std::ostringstream out;
    if (!title.empty()) out << title << '\n';
    const std::string header = pad(label_header, w0) + "  " + pad("Accuracy", w) + "  " + "macro-F1";
    out << header << '\n' << std::string(header.size(), '-') << '\n';
    for (const auto& r : rows) {
      out << pad(r.label, w0) << "  " << pad(percent(r.metrics.accuracy), w) << "  " << percent(r.metrics.macro_f1)
          << '\n';
    }
    return out.str();
  }

  // Machine-readable rows: header line then "label<TAB>accuracy<TAB>macro_f1".
  std::string tsv() const {
    std::ostringstream out;
    out << label_header << "\tAccuracy\tmacro-F1\n";
    for (const auto& r : rows) {
      out << r.label << '\t' << format_fixed(r.metrics.accuracy, 6) << '\t' << format_fixed(r.metrics.macro_f1, 6)
          << '\n';
    }
    return out.str();
  }
};

inline ReportTable report_table(std::string title, std::string label_header, std::vector<ReportRow> runs) {
  if (runs.empty()) throw DataError("report_table: no runs");
  return ReportTable{std::move(title), std::move(label_header), std::move(runs)};
}

}  // namespace tempowic
