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
#include <cstddef>
#include <filesystem>
#include <fstream>
#include <map>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "tempowic/core.hpp"
#include "tempowic/data.hpp"
#include "tempowic/utf8.hpp"

namespace tempowic {

// ---------------------------------------------------------------------------
// Vocabulary
// ---------------------------------------------------------------------------

class Vocabulary {
 public:
  Vocabulary() : tokens_{"[CLS]", "[SEP]", "[PAD]", "[OOV]"} { reindex(); }

  explicit Vocabulary(std::vector<std::string> tokens) : tokens_(std::move(tokens)) {
    static const char* kReserved[] = {"[CLS]", "[SEP]", "[PAD]", "[OOV]"};
    if (tokens_.size() < kNumReserved) throw DataError("vocabulary must start with the 4 reserved tokens");
    for (int i = 0; i < kNumReserved; ++i) {
      if (tokens_[i] != kReserved[i]) {
        throw DataError("vocabulary line " + std::to_string(i + 1) + ": expected " + kReserved[i]);
      }
    }
    reindex();
  }

  // Tokens ordered by descending frequency, ties broken lexicographically.
  static Vocabulary build(const std::vector<std::string>& normalized_tokens, std::size_t min_count = 1) {
    std::map<std::string, std::size_t> counts;
    for (const auto& t : normalized_tokens) ++counts[t];
    std::vector<std::pair<std::string, std::size_t>> sorted(counts.begin(), counts.end());
    std::stable_sort(sorted.begin(), sorted.end(), [](const auto& a, const auto& b) { return a.second > b.second; });
    Vocabulary v;
    for (const auto& [tok, n] : sorted) {
      if (n < min_count || v.index_.count(tok)) continue;
      v.index_[tok] = static_cast<int>(v.tokens_.size());
      v.tokens_.push_back(tok);
    }
    return v;
  }

  static Vocabulary load(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open vocabulary " + path.string());
    std::vector<std::string> tokens;
    std::string line;
    while (std::getline(in, line)) {
      if (!line.empty() && line.back() == '\r') line.pop_back();
      tokens.push_back(line);
    }
    return Vocabulary(std::move(tokens));
  }

  void save(const std::filesystem::path& path) const {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot write vocabulary " + path.string());
    for (const auto& t : tokens_) out << t << '\n';
  }

  int id(std::string_view token) const {
    auto it = index_.find(std::string(token));
    return it == index_.end() ? kOovId : it->second;
  }
  const std::string& token(int id) const { return tokens_.at(static_cast<std::size_t>(id)); }
  std::size_t size() const { return tokens_.size(); }
  const std::vector<std::string>& tokens() const { return tokens_; }

 private:
  void reindex() {
    index_.clear();
    for (std::size_t i = 0; i < tokens_.size(); ++i) index_.emplace(tokens_[i], static_cast<int>(i));
  }

  std::vector<std::string> tokens_;
  std::unordered_map<std::string, int> index_;
};

// ---------------------------------------------------------------------------
// Tokenizers
// ---------------------------------------------------------------------------

struct Token {
  int id = kOovId;
  std::size_t begin = 0;  // code point offsets into the source text
  std::size_t end = 0;
};

struct Word {
  std::u32string text;
  std::size_t begin = 0;
  std::size_t end = 0;
};

inline std::vector<Word> split_words(std::u32string_view text) {
  std::vector<Word> words;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && utf8::is_space(text[i])) ++i;
    if (i >= text.size()) break;
    std::size_t j = i;
    while (j < text.size() && !utf8::is_space(text[j])) ++j;
    words.push_back({std::u32string(text.substr(i, j - i)), i, j});
    i = j;
  }
  return words;
}

inline std::string normalize_token(std::u32string_view word) { return utf8::encode(utf8::to_lower(word)); }

// Collects normalized whitespace tokens of both texts, for vocabulary building.
inline std::vector<std::string> corpus_tokens(const Dataset& data) {
  std::vector<std::string> out;
  for (const auto& inst : data) {
    for (const auto* text : {&inst.text1, &inst.text2}) {
      for (const auto& w : split_words(utf8::decode(*text))) out.push_back(normalize_token(w.text));
    }
  }
  return out;
}

// Subword tokenizers plug in here; offsets are code points into the input.
class Tokenizer {
 public:
  virtual ~Tokenizer() = default;
  virtual std::vector<Token> tokenize(std::u32string_view text) const = 0;
  virtual std::size_t vocab_size() const = 0;
};

class WhitespaceTokenizer final : public Tokenizer {
 public:
  explicit WhitespaceTokenizer(Vocabulary vocab) : vocab_(std::move(vocab)) {}

  std::vector<Token> tokenize(std::u32string_view text) const override {
    std::vector<Token> out;
    for (const auto& w : split_words(text)) out.push_back({vocab_.id(normalize_token(w.text)), w.begin, w.end});
    return out;
  }
  std::size_t vocab_size() const override { return vocab_.size(); }
  const Vocabulary& vocab() const { return vocab_; }

 private:
  Vocabulary vocab_;
};

// ---------------------------------------------------------------------------
// Pair layout: [CLS] text1 [SEP] text2 [SEP]
// ---------------------------------------------------------------------------

enum class Segment { kCls, kText1, kSep, kText2 };

struct TokenOffset {
  std::size_t begin = 0;
  std::size_t end = 0;
  Segment segment = Segment::kCls;
};

// Half-open range of token indices.
struct TokenRange {
  std::size_t begin = 0;
  std::size_t end = 0;

  std::size_t size() const { return end > begin ? end - begin : 0; }
  bool empty() const { return size() == 0; }
  bool operator==(const TokenRange&) const = default;
};

struct TokenizedPair {
  std::vector<int> token_ids;
  std::vector<TokenOffset> offsets;
  TokenRange span_tokens1;
  TokenRange span_tokens2;
  std::size_t cls_index = 0;
};

namespace detail {

// Tokens overlapping the character span, as indices into `tokens`.
inline TokenRange covering_tokens(const std::vector<Token>& tokens, const Span& span) {
  TokenRange r{tokens.size(), tokens.size()};
  bool found = false;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    const bool overlaps = tokens[i].begin < span.end && span.begin < tokens[i].end;
    if (!overlaps) continue;
    if (!found) r.begin = i;
    r.end = i + 1;
    found = true;
  }
  if (!found) return {0, 0};
  return r;
}

}  // namespace detail

// Longest-first truncation down to max_len. Throws TargetTruncated rather than
// cutting into either target span.
inline TokenizedPair tokenize_pair(const PairInstance& inst, const Tokenizer& tokenizer, std::size_t max_len) {
  if (max_len < 3) throw ConfigError("max_len must be at least 3");
  const std::u32string t1 = utf8::decode(inst.text1);
  const std::u32string t2 = utf8::decode(inst.text2);
  auto tok1 = tokenizer.tokenize(t1);
  auto tok2 = tokenizer.tokenize(t2);
  const TokenRange r1 = detail::covering_tokens(tok1, inst.span1);
  const TokenRange r2 = detail::covering_tokens(tok2, inst.span2);
  if (r1.empty()) throw DataError("instance " + inst.id + ": span1 covers no token");
  if (r2.empty()) throw DataError("instance " + inst.id + ": span2 covers no token");

  std::size_t n1 = tok1.size();
  std::size_t n2 = tok2.size();
  const std::size_t budget = max_len - 3;
  while (n1 + n2 > budget) {
    if (n1 > n2) {
      --n1;
    } else {
      --n2;
    }
  }
  if (r1.end > n1 || r2.end > n2) {
    throw TargetTruncated("instance " + inst.id + ": truncation to max_len=" + std::to_string(max_len) +
                          " would cut a target span");
  }

  TokenizedPair out;
  out.token_ids.reserve(n1 + n2 + 3);
  out.token_ids.push_back(kClsId);
  out.offsets.push_back({0, 0, Segment::kCls});
  for (std::size_t i = 0; i < n1; ++i) {
    out.token_ids.push_back(tok1[i].id);
    out.offsets.push_back({tok1[i].begin, tok1[i].end, Segment::kText1});
  }
  out.token_ids.push_back(kSepId);
  out.offsets.push_back({0, 0, Segment::kSep});
  const std::size_t base2 = n1 + 2;
  for (std::size_t i = 0; i < n2; ++i) {
    out.token_ids.push_back(tok2[i].id);
    out.offsets.push_back({tok2[i].begin, tok2[i].end, Segment::kText2});
  }
  out.token_ids.push_back(kSepId);
  out.offsets.push_back({0, 0, Segment::kSep});
  out.span_tokens1 = {r1.begin + 1, r1.end + 1};
  out.span_tokens2 = {r2.begin + base2, r2.end + base2};
  out.cls_index = 0;
  return out;
}

// ---------------------------------------------------------------------------
// Target-word representation
// ---------------------------------------------------------------------------

enum class ReprMode { kFirst, kMean, kFirstLast };

inline Eigen::Index repr_dim(ReprMode mode, Eigen::Index d) { return mode == ReprMode::kFirstLast ? 2 * d : d; }

inline const char* to_string(ReprMode m) {
  switch (m) {
    case ReprMode::kFirst:
      return "first";
    case ReprMode::kMean:
      return "mean";
    case ReprMode::kFirstLast:
      return "first_last";
  }
  return "?";
}

inline ReprMode parse_repr_mode(std::string_view s) {
  if (s == "first") return ReprMode::kFirst;
  if (s == "mean") return ReprMode::kMean;
  if (s == "first_last") return ReprMode::kFirstLast;
  throw ConfigError("unknown representation mode '" + std::string(s) + "'");
}

template <typename T>
Vector<T> extract_target(const Matrix<T>& hidden, const TokenRange& span, ReprMode mode) {
  if (span.empty()) throw DataError("extract_target: empty span");
  if (span.end > static_cast<std::size_t>(hidden.rows())) throw DataError("extract_target: span outside sequence");
  const auto first = static_cast<Eigen::Index>(span.begin);
  const auto last = static_cast<Eigen::Index>(span.end - 1);
  const Eigen::Index d = hidden.cols();
  switch (mode) {
    case ReprMode::kFirst:
      return hidden.row(first).transpose();
    case ReprMode::kMean: {
      Vector<T> acc = Vector<T>::Zero(d);
      for (Eigen::Index r = first; r <= last; ++r) acc += hidden.row(r).transpose();
      return acc / static_cast<T>(span.size());
    }
    case ReprMode::kFirstLast: {
      Vector<T> out(2 * d);
      out.head(d) = hidden.row(first).transpose();
      out.tail(d) = hidden.row(last).transpose();
      return out;
    }
  }
  return {};
}

// Accumulates d(loss)/d(hidden) given d(loss)/d(target vector).
template <typename T>
void extract_target_backward(const Vector<T>& d_out, const TokenRange& span, ReprMode mode, Matrix<T>& d_hidden) {
  const auto first = static_cast<Eigen::Index>(span.begin);
  const auto last = static_cast<Eigen::Index>(span.end - 1);
  const Eigen::Index d = d_hidden.cols();
  switch (mode) {
    case ReprMode::kFirst:
      d_hidden.row(first) += d_out.transpose();
      break;
    case ReprMode::kMean: {
      const T scale = T(1) / static_cast<T>(span.size());
      for (Eigen::Index r = first; r <= last; ++r) d_hidden.row(r) += scale * d_out.transpose();
      break;
    }
    case ReprMode::kFirstLast:
      d_hidden.row(first) += d_out.head(d).transpose();
      d_hidden.row(last) += d_out.tail(d).transpose();
      break;
  }
}

}  // namespace tempowic
