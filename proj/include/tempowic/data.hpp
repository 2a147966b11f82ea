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

#include <array>
#include <cstddef>
#include <filesystem>
#include <fstream>
#include <nlohmann/json.hpp>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "tempowic/errors.hpp"
#include "tempowic/utf8.hpp"

namespace tempowic {

// Half-open code point range [begin, end).
struct Span {
  std::size_t begin = 0;
  std::size_t end = 0;

  std::size_t size() const { return end > begin ? end - begin : 0; }
  bool operator==(const Span&) const = default;
};

// One labeled pair. label == true means the target word has the same meaning
// in both texts.
struct PairInstance {
  std::string id;
  std::string word;
  std::string text1;
  Span span1;
  std::optional<std::string> date1;
  std::string text2;
  Span span2;
  std::optional<std::string> date2;
  bool label = false;

  bool operator==(const PairInstance&) const = default;
};

using Dataset = std::vector<PairInstance>;

// ---------------------------------------------------------------------------
// Text cleaning
// ---------------------------------------------------------------------------

struct RuleCounts {
  std::size_t html_tags = 0;
  std::size_t html_entities = 0;
  std::size_t emoji = 0;
  std::size_t mentions = 0;

  RuleCounts& operator+=(const RuleCounts& o) {
    html_tags += o.html_tags;
    html_entities += o.html_entities;
    emoji += o.emoji;
    mentions += o.mentions;
    return *this;
  }
  bool operator==(const RuleCounts&) const = default;
};

struct CodepointRange {
  char32_t first;
  char32_t last;
};

inline std::vector<CodepointRange> default_emoji_ranges() {
  return {
      {0x1F1E6, 0x1F1FF},  // regional indicators (flags)
      {0x1F300, 0x1F5FF},  // misc symbols and pictographs
      {0x1F600, 0x1F64F},  // emoticons
      {0x1F680, 0x1F6FF},  // transport and map
      {0x1F700, 0x1F77F},  // alchemical
      {0x1F780, 0x1F7FF},  // geometric shapes extended
      {0x1F800, 0x1F8FF},  // supplemental arrows-c
      {0x1F900, 0x1F9FF},  // supplemental symbols and pictographs
      {0x1FA00, 0x1FAFF},  // chess, symbols and pictographs extended-a
      {0x2600, 0x26FF},    // misc symbols
      {0x2700, 0x27BF},    // dingbats
      {0xFE00, 0xFE0F},    // variation selectors
      {0x200D, 0x200D},    // zero width joiner
      {0x20E3, 0x20E3},    // combining enclosing keycap
      {0xE0020, 0xE007F},  // tag characters (subdivision flags)
  };
}

struct CleanOptions {
  std::vector<CodepointRange> emoji_ranges = default_emoji_ranges();
  std::string placeholder = "@user";
};

// mapping[i] is the cleaned offset of original code point i, or nullopt when
// that code point was deleted.
using OffsetMap = std::vector<std::optional<std::size_t>>;

struct CleanResult {
  std::string text;
  OffsetMap mapping;
  RuleCounts counts;
};

namespace detail {

struct Rewriter {
  std::u32string out;
  OffsetMap map;

  void keep(char32_t c) {
    map.emplace_back(out.size());
    out.push_back(c);
  }
  void drop() { map.emplace_back(std::nullopt); }
};

inline std::optional<char32_t> decode_entity(std::u32string_view body) {
  static const std::array<std::pair<std::u32string_view, char32_t>, 6> kNamed = {{
      {U"amp", U'&'},
      {U"lt", U'<'},
      {U"gt", U'>'},
      {U"quot", U'"'},
      {U"apos", U'\''},
      {U"nbsp", U' '},
  }};
  for (const auto& [name, cp] : kNamed) {
    if (body == name) return cp;
  }
  if (body.size() >= 2 && body[0] == U'#') {
    const bool hex = body[1] == U'x' || body[1] == U'X';
    const std::size_t start = hex ? 2 : 1;
    if (start >= body.size()) return std::nullopt;
    std::uint32_t value = 0;
    for (std::size_t i = start; i < body.size(); ++i) {
      const char32_t c = body[i];
      std::uint32_t digit;
      if (utf8::is_ascii_digit(c)) {
        digit = c - U'0';
      } else if (hex && c >= U'a' && c <= U'f') {
        digit = c - U'a' + 10;
      } else if (hex && c >= U'A' && c <= U'F') {
        digit = c - U'A' + 10;
      } else {
        return std::nullopt;
      }
      value = value * (hex ? 16 : 10) + digit;
      if (value > 0x10FFFF) return std::nullopt;
    }
    if (value == 0 || (value >= 0xD800 && value <= 0xDFFF)) return std::nullopt;
    return static_cast<char32_t>(value);
  }
  return std::nullopt;
}

inline Rewriter decode_entities(std::u32string_view in, RuleCounts& counts) {
  Rewriter rw;
  std::size_t i = 0;
  while (i < in.size()) {
    if (in[i] == U'&') {
      const std::size_t limit = std::min(in.size(), i + 12);
      std::size_t semi = i + 1;
      while (semi < limit && in[semi] != U';') ++semi;
      if (semi < limit) {
        if (auto cp = decode_entity(in.substr(i + 1, semi - i - 1))) {
          rw.keep(*cp);
          for (std::size_t k = i + 1; k <= semi; ++k) rw.drop();
          ++counts.html_entities;
          i = semi + 1;
          continue;
        }
      }
    }
    rw.keep(in[i]);
    ++i;
  }
  return rw;
}

// Removes every match of <[^>]+>, scanning left to right.
inline Rewriter strip_tags(std::u32string_view in, RuleCounts& counts) {
  Rewriter rw;
  std::size_t i = 0;
  while (i < in.size()) {
    if (in[i] == U'<') {
      const std::size_t close = in.find(U'>', i + 1);
      if (close != std::u32string_view::npos && close > i + 1) {
        for (std::size_t k = i; k <= close; ++k) rw.drop();
        ++counts.html_tags;
        i = close + 1;
        continue;
      }
    }
    rw.keep(in[i]);
    ++i;
  }
  return rw;
}

inline Rewriter strip_emoji(std::u32string_view in, const std::vector<CodepointRange>& ranges, RuleCounts& counts) {
  Rewriter rw;
  for (char32_t c : in) {
    bool hit = false;
    for (const auto& r : ranges) {
      if (c >= r.first && c <= r.last) {
        hit = true;
        break;
      }
    }
    if (hit) {
      rw.drop();
      ++counts.emoji;
    } else {
      rw.keep(c);
    }
  }
  return rw;
}

// An @-mention is '@' at a token start followed by one or more [A-Za-z0-9_].
inline Rewriter replace_mentions(std::u32string_view in, std::u32string_view placeholder, RuleCounts& counts) {
  Rewriter rw;
  std::size_t i = 0;
  while (i < in.size()) {
    const bool at_start = i == 0 || !utf8::is_word_char(in[i - 1]);
    if (in[i] == U'@' && at_start && i + 1 < in.size() && utf8::is_word_char(in[i + 1])) {
      std::size_t j = i + 1;
      while (j < in.size() && utf8::is_word_char(in[j])) ++j;
      const std::u32string_view mention = in.substr(i, j - i);
      const std::size_t base = rw.out.size();
      rw.out.append(placeholder);
      for (std::size_t k = 0; k < mention.size(); ++k) {
        rw.map.emplace_back(base + std::min(k, placeholder.size() - 1));
      }
      if (mention != placeholder) ++counts.mentions;
      i = j;
      continue;
    }
    rw.keep(in[i]);
    ++i;
  }
  return rw;
}

// Collapses whitespace runs to one space and trims both ends. The first
// character of an interior run maps to the emitted space.
inline Rewriter collapse_whitespace(std::u32string_view in) {
  Rewriter rw;
  std::optional<std::size_t> run_start;
  for (char32_t c : in) {
    if (utf8::is_space(c)) {
      if (!run_start && !rw.out.empty()) run_start = rw.map.size();
      rw.drop();
      continue;
    }
    if (run_start) {
      rw.map[*run_start] = rw.out.size();
      rw.out.push_back(U' ');
      run_start.reset();
    }
    rw.keep(c);
  }
  return rw;
}

inline void compose(OffsetMap& total, const OffsetMap& stage) {
  for (auto& m : total) {
    if (m) m = stage[*m];
  }
}

}  // namespace detail

// Applies entity decoding, tag stripping, emoji removal, mention replacement
// and whitespace collapsing, repeated until the text stops changing. Running
// to a fixed point is what makes the function idempotent (e.g. "&amp;lt;b&gt;").
inline CleanResult clean_text(std::string_view text, const CleanOptions& options = {}) {
  const std::u32string placeholder = utf8::decode(options.placeholder);
  if (placeholder.empty()) throw ConfigError("mention placeholder must not be empty");
  std::u32string cur = utf8::decode(text);
  CleanResult result;
  result.mapping.resize(cur.size());
  for (std::size_t i = 0; i < cur.size(); ++i) result.mapping[i] = i;

  constexpr int kMaxPasses = 16;
  for (int pass = 0; pass < kMaxPasses; ++pass) {
    const std::u32string before = cur;
    auto run = [&](detail::Rewriter rw) {
      detail::compose(result.mapping, rw.map);
      cur = std::move(rw.out);
    };
    run(detail::decode_entities(cur, result.counts));
    run(detail::strip_tags(cur, result.counts));
    run(detail::strip_emoji(cur, options.emoji_ranges, result.counts));
    run(detail::replace_mentions(cur, placeholder, result.counts));
    run(detail::collapse_whitespace(cur));
    if (cur == before) break;
  }
  result.text = utf8::encode(cur);
  return result;
}

// Translates an original span through a cleaning map. The new span runs from
// the first to the last surviving code point; nullopt if none survive.
inline std::optional<Span> remap_span(const Span& span, const OffsetMap& mapping) {
  std::optional<std::size_t> first;
  std::optional<std::size_t> last;
  for (std::size_t i = span.begin; i < span.end && i < mapping.size(); ++i) {
    if (!mapping[i]) continue;
    if (!first) first = mapping[i];
    last = mapping[i];
  }
  if (!first) return std::nullopt;
  return Span{*first, *last + 1};
}

// ---------------------------------------------------------------------------
// Span validation
// ---------------------------------------------------------------------------

struct CleaningReport {
  std::size_t n_input = 0;
  std::size_t n_kept = 0;
  std::size_t n_dropped_bad_span = 0;
  RuleCounts substitutions;
};

// Maximum number of trailing letters admitted after the target word, so that
// "banks" or "banking" still match "bank".
inline constexpr std::size_t kMaxInflectionSuffix = 3;

inline bool span_matches_word(std::string_view text, const Span& span, std::string_view word) {
  const std::u32string t = utf8::decode(text);
  if (!(span.begin < span.end && span.end <= t.size())) return false;
  const std::u32string surface = utf8::to_lower(std::u32string_view(t).substr(span.begin, span.size()));
  const std::u32string target = utf8::to_lower(utf8::decode(word));
  if (target.empty() || surface.size() < target.size()) return false;
  if (surface.compare(0, target.size(), target) != 0) return false;
  const std::size_t extra = surface.size() - target.size();
  if (extra > kMaxInflectionSuffix) return false;
  for (std::size_t i = target.size(); i < surface.size(); ++i) {
    if (!utf8::is_letter(surface[i])) return false;
  }
  return true;
}

inline bool instance_is_valid(const PairInstance& inst) {
  return span_matches_word(inst.text1, inst.span1, inst.word) && span_matches_word(inst.text2, inst.span2, inst.word);
}

inline std::pair<Dataset, CleaningReport> validate_and_drop(const Dataset& instances) {
  CleaningReport report;
  report.n_input = instances.size();
  Dataset kept;
  kept.reserve(instances.size());
  for (const auto& inst : instances) {
    if (instance_is_valid(inst)) {
      kept.push_back(inst);
    } else {
      ++report.n_dropped_bad_span;
    }
  }
  report.n_kept = kept.size();
  return {std::move(kept), report};
}

// Cleans both texts and remaps both spans. A span with no surviving
// characters becomes empty so that validation drops the instance.
inline PairInstance clean_instance(const PairInstance& inst, RuleCounts& counts, const CleanOptions& options = {}) {
  PairInstance out = inst;
  auto side = [&](const std::string& text, const Span& span, std::string& text_out, Span& span_out) {
    CleanResult r = clean_text(text, options);
    counts += r.counts;
    span_out = remap_span(span, r.mapping).value_or(Span{0, 0});
    text_out = std::move(r.text);
  };
  side(inst.text1, inst.span1, out.text1, out.span1);
  side(inst.text2, inst.span2, out.text2, out.span2);
  return out;
}

inline std::pair<Dataset, CleaningReport> clean_dataset(const Dataset& raw, const CleanOptions& options = {}) {
  RuleCounts counts;
  Dataset cleaned;
  cleaned.reserve(raw.size());
  for (const auto& inst : raw) cleaned.push_back(clean_instance(inst, counts, options));
  auto [kept, report] = validate_and_drop(cleaned);
  report.substitutions = counts;
  return {std::move(kept), report};
}

// ---------------------------------------------------------------------------
// Canonical dataset file (JSON lines, fixed field order)
// ---------------------------------------------------------------------------

namespace detail {

inline std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  return in;
}

inline std::ofstream open_output(const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write " + path.string());
  return out;
}

inline const nlohmann::json& require(const nlohmann::json& rec, const char* field, const std::string& id) {
  auto it = rec.find(field);
  if (it == rec.end()) throw DataError("record " + id + ": missing field '" + field + "'");
  return *it;
}

inline std::string require_string(const nlohmann::json& rec, const char* field, const std::string& id) {
  const auto& v = require(rec, field, id);
  if (!v.is_string()) throw DataError("record " + id + ": field '" + field + "' must be a string");
  return v.get<std::string>();
}

inline std::size_t require_offset(const nlohmann::json& rec, const char* field, const std::string& id) {
  const auto& v = require(rec, field, id);
  if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<long long>() >= 0)) {
    throw DataError("record " + id + ": field '" + field + "' must be a non-negative integer");
  }
  return v.get<std::size_t>();
}

inline std::optional<std::string> optional_string(const nlohmann::json& rec, const char* field, const std::string& id) {
  const auto& v = require(rec, field, id);
  if (v.is_null()) return std::nullopt;
  if (!v.is_string()) throw DataError("record " + id + ": field '" + field + "' must be a string or null");
  return v.get<std::string>();
}

}  // namespace detail

inline nlohmann::ordered_json to_canonical_json(const PairInstance& inst) {
  nlohmann::ordered_json j;
  j["id"] = inst.id;
  j["word"] = inst.word;
  j["text1"] = inst.text1;
  j["start1"] = inst.span1.begin;
  j["end1"] = inst.span1.end;
  j["date1"] = inst.date1 ? nlohmann::ordered_json(*inst.date1) : nlohmann::ordered_json(nullptr);
  j["text2"] = inst.text2;
  j["start2"] = inst.span2.begin;
  j["end2"] = inst.span2.end;
  j["date2"] = inst.date2 ? nlohmann::ordered_json(*inst.date2) : nlohmann::ordered_json(nullptr);
  j["label"] = inst.label ? 1 : 0;
  return j;
}

inline PairInstance from_canonical_json(const nlohmann::json& rec, std::size_t line_no) {
  if (!rec.is_object()) throw DataError("line " + std::to_string(line_no) + ": record is not an object");
  std::string id = "at line " + std::to_string(line_no);
  if (auto it = rec.find("id"); it != rec.end() && it->is_string()) id = it->get<std::string>();
  PairInstance inst;
  inst.id = detail::require_string(rec, "id", id);
  inst.word = detail::require_string(rec, "word", id);
  inst.text1 = detail::require_string(rec, "text1", id);
  inst.span1 = {detail::require_offset(rec, "start1", id), detail::require_offset(rec, "end1", id)};
  inst.date1 = detail::optional_string(rec, "date1", id);
  inst.text2 = detail::require_string(rec, "text2", id);
  inst.span2 = {detail::require_offset(rec, "start2", id), detail::require_offset(rec, "end2", id)};
  inst.date2 = detail::optional_string(rec, "date2", id);
  const auto& label = detail::require(rec, "label", id);
  if (!label.is_number_integer() || (label.get<int>() != 0 && label.get<int>() != 1)) {
    throw DataError("record " + id + ": field 'label' must be 0 or 1");
  }
  inst.label = label.get<int>() == 1;
  return inst;
}

inline void save_canonical(const Dataset& instances, const std::filesystem::path& path) {
  auto out = detail::open_output(path);
  for (const auto& inst : instances) out << to_canonical_json(inst).dump() << '\n';
  if (!out) throw DataError("write failed: " + path.string());
}

inline Dataset load_canonical(const std::filesystem::path& path) {
  auto in = detail::open_input(path);
  Dataset out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    nlohmann::json rec;
    try {
      rec = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw DataError(path.string() + ":" + std::to_string(line_no) + ": " + e.what());
    }
    out.push_back(from_canonical_json(rec, line_no));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Upstream TempoWiC release: JSON lines with nested tweet objects, labels in a
// separate "id<TAB>label" file.
// ---------------------------------------------------------------------------

inline std::unordered_map<std::string, bool> load_label_file(const std::filesystem::path& path) {
  auto in = detail::open_input(path);
  std::unordered_map<std::string, bool> labels;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos)
      throw DataError(path.string() + ":" + std::to_string(line_no) + ": expected id<TAB>label");
    const std::string value = line.substr(tab + 1);
    bool label;
    if (value == "1" || value == "T" || value == "True") {
      label = true;
    } else if (value == "0" || value == "F" || value == "False") {
      label = false;
    } else {
      throw DataError(path.string() + ":" + std::to_string(line_no) + ": bad label '" + value + "'");
    }
    labels[line.substr(0, tab)] = label;
  }
  return labels;
}

inline Dataset load_tempowic(const std::filesystem::path& data_path,
                             const std::optional<std::filesystem::path>& labels_path) {
  std::unordered_map<std::string, bool> labels;
  if (labels_path) labels = load_label_file(*labels_path);
  auto in = detail::open_input(data_path);
  Dataset out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    nlohmann::json rec;
    try {
      rec = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw DataError(data_path.string() + ":" + std::to_string(line_no) + ": " + e.what());
    }
    std::string id = "at line " + std::to_string(line_no);
    if (auto it = rec.find("id"); it != rec.end() && it->is_string()) id = it->get<std::string>();
    PairInstance inst;
    inst.id = detail::require_string(rec, "id", id);
    inst.word = detail::require_string(rec, "word", id);
    auto tweet = [&](const char* key, std::string& text, Span& span, std::optional<std::string>& date) {
      const auto& t = detail::require(rec, key, id);
      if (!t.is_object()) throw DataError("record " + id + ": field '" + key + "' must be an object");
      text = detail::require_string(t, "text", id);
      span = {detail::require_offset(t, "text_start", id), detail::require_offset(t, "text_end", id)};
      if (auto d = t.find("date"); d != t.end() && d->is_string()) date = d->get<std::string>();
    };
    tweet("tweet1", inst.text1, inst.span1, inst.date1);
    tweet("tweet2", inst.text2, inst.span2, inst.date2);
    if (labels_path) {
      auto it = labels.find(inst.id);
      if (it == labels.end()) throw DataError("record " + inst.id + ": no label in " + labels_path->string());
      inst.label = it->second;
    } else if (auto l = rec.find("label"); l != rec.end()) {
      inst.label = l->is_boolean() ? l->get<bool>() : l->get<int>() == 1;
    } else {
      throw DataError("record " + inst.id + ": missing field 'label' and no label file given");
    }
    out.push_back(std::move(inst));
  }
  return out;
}

// ---------------------------------------------------------------------------
// WiC augmentation data
// ---------------------------------------------------------------------------

struct WicLoadResult {
  Dataset instances;
  std::size_t n_skipped = 0;  // rows whose token index fell outside the sentence
};

// Character span of the index-th whitespace-separated token.
inline std::optional<Span> whitespace_token_span(std::string_view sentence, std::size_t index) {
  const std::u32string s = utf8::decode(sentence);
  std::size_t i = 0;
  std::size_t k = 0;
  while (i < s.size()) {
    while (i < s.size() && utf8::is_space(s[i])) ++i;
    if (i >= s.size()) break;
    std::size_t j = i;
    while (j < s.size() && !utf8::is_space(s[j])) ++j;
    if (k == index) return Span{i, j};
    ++k;
    i = j;
  }
  return std::nullopt;
}

// "train.data.txt" -> "train.gold.txt"
inline std::filesystem::path wic_gold_path(const std::filesystem::path& data_path) {
  std::string name = data_path.filename().string();
  const auto pos = name.rfind("data");
  if (pos == std::string::npos) return data_path.parent_path() / (name + ".gold");
  name.replace(pos, 4, "gold");
  return data_path.parent_path() / name;
}

inline WicLoadResult load_wic_augmentation(const std::filesystem::path& data_path,
                                           std::optional<std::filesystem::path> gold_path = std::nullopt) {
  if (!gold_path) gold_path = wic_gold_path(data_path);
  auto data = detail::open_input(data_path);
  auto gold = detail::open_input(*gold_path);
  WicLoadResult result;
  std::string row;
  std::string label;
  std::size_t line_no = 0;
  auto fail = [&](const std::string& msg) {
    throw DataError(data_path.string() + ":" + std::to_string(line_no) + ": " + msg);
  };
  while (std::getline(data, row)) {
    ++line_no;
    if (!row.empty() && row.back() == '\r') row.pop_back();
    if (row.empty()) continue;
    if (!std::getline(gold, label)) fail("no matching line in " + gold_path->string());
    if (!label.empty() && label.back() == '\r') label.pop_back();

    std::vector<std::string> fields;
    std::stringstream ss(row);
    std::string field;
    while (std::getline(ss, field, '\t')) fields.push_back(field);
    if (fields.size() != 5) fail("expected 5 tab-separated fields, got " + std::to_string(fields.size()));

    const std::string& idx = fields[2];
    const auto dash = idx.find('-');
    if (dash == std::string::npos) fail("bad index pair '" + idx + "'");
    std::size_t i1 = 0;
    std::size_t i2 = 0;
    try {
      std::size_t used = 0;
      i1 = std::stoul(idx.substr(0, dash), &used);
      if (used != dash) fail("bad index pair '" + idx + "'");
      i2 = std::stoul(idx.substr(dash + 1), &used);
      if (used != idx.size() - dash - 1) fail("bad index pair '" + idx + "'");
    } catch (const std::logic_error&) {
      fail("bad index pair '" + idx + "'");
    }

    bool value;
    if (label == "T") {
      value = true;
    } else if (label == "F") {
      value = false;
    } else {
      fail("bad label '" + label + "'");
    }

    const auto s1 = whitespace_token_span(fields[3], i1);
    const auto s2 = whitespace_token_span(fields[4], i2);
    if (!s1 || !s2) {
      ++result.n_skipped;
      continue;
    }
    PairInstance inst;
    inst.id = "wic-" + std::to_string(line_no);
    inst.word = fields[0];
    inst.text1 = fields[3];
    inst.span1 = *s1;
    inst.text2 = fields[4];
    inst.span2 = *s2;
    inst.label = value;
    result.instances.push_back(std::move(inst));
  }
  return result;
}

}  // namespace tempowic
