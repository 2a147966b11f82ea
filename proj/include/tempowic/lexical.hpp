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
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "tempowic/core.hpp"
#include "tempowic/utf8.hpp"

namespace tempowic {

// Universal POS tagset, in a fixed order that defines tag ids.
inline constexpr std::array<std::string_view, 17> kUposTags = {"ADJ",   "ADP",   "ADV", "AUX",  "CCONJ", "DET",
                                                               "INTJ",  "NOUN",  "NUM", "PART", "PRON",  "PROPN",
                                                               "PUNCT", "SCONJ", "SYM", "VERB", "X"};

inline constexpr int kUnknownTag = 16;  // X

inline int upos_id(std::string_view tag) {
  for (std::size_t i = 0; i < kUposTags.size(); ++i) {
    if (kUposTags[i] == tag) return static_cast<int>(i);
  }
  throw DataError("unknown POS tag '" + std::string(tag) + "'");
}

struct PosSequence {
  std::vector<int> tags;

  static constexpr std::size_t tagset_size() { return kUposTags.size(); }
};

// Bundled lexicon: closed-class words plus frequent open-class words.
inline const std::vector<std::pair<std::string_view, std::string_view>>& builtin_pos_lexicon() {
  static const std::vector<std::pair<std::string_view, std::string_view>> kLexicon = {
      // determiners
      {"the", "DET"},
      {"a", "DET"},
      {"an", "DET"},
      {"this", "DET"},
      {"that", "DET"},
      {"these", "DET"},
      {"those", "DET"},
      {"every", "DET"},
      {"each", "DET"},
      {"some", "DET"},
      {"any", "DET"},
      {"no", "DET"},
      {"all", "DET"},
      {"both", "DET"},
      {"another", "DET"},
      {"either", "DET"},
      {"neither", "DET"},
      {"my", "PRON"},
      {"your", "PRON"},
      {"his", "PRON"},
      {"her", "PRON"},
      {"its", "PRON"},
      {"our", "PRON"},
      {"their", "PRON"},
      // pronouns
      {"i", "PRON"},
      {"you", "PRON"},
      {"he", "PRON"},
      {"she", "PRON"},
      {"it", "PRON"},
      {"we", "PRON"},
      {"they", "PRON"},
      {"me", "PRON"},
      {"him", "PRON"},
      {"us", "PRON"},
      {"them", "PRON"},
      {"mine", "PRON"},
      {"yours", "PRON"},
      {"ours", "PRON"},
      {"theirs", "PRON"},
      {"myself", "PRON"},
      {"yourself", "PRON"},
      {"himself", "PRON"},
      {"herself", "PRON"},
      {"itself", "PRON"},
      {"themselves", "PRON"},
      {"who", "PRON"},
      {"whom", "PRON"},
      {"what", "PRON"},
      {"which", "PRON"},
      {"someone", "PRON"},
      {"something", "PRON"},
      {"anyone", "PRON"},
      {"anything", "PRON"},
      {"everyone", "PRON"},
      {"everything", "PRON"},
      {"nothing", "PRON"},
      {"nobody", "PRON"},
      {"i'm", "PRON"},
      {"it's", "PRON"},
      // adpositions
      {"of", "ADP"},
      {"in", "ADP"},
      {"on", "ADP"},
      {"at", "ADP"},
      {"by", "ADP"},
      {"for", "ADP"},
      {"with", "ADP"},
      {"from", "ADP"},
      {"to", "PART"},
      {"into", "ADP"},
      {"onto", "ADP"},
      {"about", "ADP"},
      {"over", "ADP"},
      {"under", "ADP"},
      {"after", "ADP"},
      {"before", "ADP"},
      {"between", "ADP"},
      {"through", "ADP"},
      {"during", "ADP"},
      {"without", "ADP"},
      {"within", "ADP"},
      {"against", "ADP"},
      {"among", "ADP"},
      {"across", "ADP"},
      {"behind", "ADP"},
      {"near", "ADP"},
      {"around", "ADP"},
      {"like", "ADP"},
      {"via", "ADP"},
      {"per", "ADP"},
      {"than", "ADP"},
      {"since", "SCONJ"},
      // conjunctions
      {"and", "CCONJ"},
      {"or", "CCONJ"},
      {"but", "CCONJ"},
      {"nor", "CCONJ"},
      {"yet", "CCONJ"},
      {"so", "ADV"},
      {"because", "SCONJ"},
      {"if", "SCONJ"},
      {"while", "SCONJ"},
      {"although", "SCONJ"},
      {"though", "SCONJ"},
      {"unless", "SCONJ"},
      {"whether", "SCONJ"},
      {"when", "ADV"},
      {"where", "ADV"},
      {"why", "ADV"},
      {"how", "ADV"},
      // auxiliaries
      {"be", "AUX"},
      {"is", "AUX"},
      {"am", "AUX"},
      {"are", "AUX"},
      {"was", "AUX"},
      {"were", "AUX"},
      {"been", "AUX"},
      {"being", "AUX"},
      {"have", "AUX"},
      {"has", "AUX"},
      {"had", "AUX"},
      {"do", "AUX"},
      {"does", "AUX"},
      {"did", "AUX"},
      {"will", "AUX"},
      {"would", "AUX"},
      {"can", "AUX"},
      {"could", "AUX"},
      {"shall", "AUX"},
      {"should", "AUX"},
      {"may", "AUX"},
      {"might", "AUX"},
      {"must", "AUX"},
      {"don't", "AUX"},
      {"can't", "AUX"},
      {"won't", "AUX"},
      {"isn't", "AUX"},
      {"didn't", "AUX"},
      // particles and adverbs
      {"not", "PART"},
      {"n't", "PART"},
      {"'s", "PART"},
      {"up", "ADP"},
      {"out", "ADP"},
      {"off", "ADP"},
      {"very", "ADV"},
      {"too", "ADV"},
      {"also", "ADV"},
      {"just", "ADV"},
      {"only", "ADV"},
      {"still", "ADV"},
      {"already", "ADV"},
      {"now", "ADV"},
      {"then", "ADV"},
      {"here", "ADV"},
      {"there", "ADV"},
      {"never", "ADV"},
      {"always", "ADV"},
      {"often", "ADV"},
      {"again", "ADV"},
      {"today", "NOUN"},
      {"tomorrow", "NOUN"},
      {"yesterday", "NOUN"},
      {"even", "ADV"},
      {"well", "ADV"},
      {"really", "ADV"},
      {"soon", "ADV"},
      {"back", "ADV"},
      {"away", "ADV"},
      {"more", "ADV"},
      {"most", "ADV"},
      {"much", "ADV"},
      {"less", "ADV"},
      {"almost", "ADV"},
      // interjections
      {"oh", "INTJ"},
      {"wow", "INTJ"},
      {"lol", "INTJ"},
      {"omg", "INTJ"},
      {"yes", "INTJ"},
      {"yeah", "INTJ"},
      {"hey", "INTJ"},
      {"hi", "INTJ"},
      {"hello", "INTJ"},
      {"please", "INTJ"},
      {"thanks", "INTJ"},
      {"ok", "INTJ"},
      {"okay", "INTJ"},
      {"haha", "INTJ"},
      // numerals
      {"one", "NUM"},
      {"two", "NUM"},
      {"three", "NUM"},
      {"four", "NUM"},
      {"five", "NUM"},
      {"six", "NUM"},
      {"seven", "NUM"},
      {"eight", "NUM"},
      {"nine", "NUM"},
      {"ten", "NUM"},
      {"hundred", "NUM"},
      {"thousand", "NUM"},
      {"million", "NUM"},
      {"billion", "NUM"},
      // frequent nouns
      {"bank", "NOUN"},
      {"bed", "NOUN"},
      {"river", "NOUN"},
      {"money", "NOUN"},
      {"time", "NOUN"},
      {"year", "NOUN"},
      {"day", "NOUN"},
      {"week", "NOUN"},
      {"people", "NOUN"},
      {"man", "NOUN"},
      {"woman", "NOUN"},
      {"world", "NOUN"},
      {"life", "NOUN"},
      {"house", "NOUN"},
      {"home", "NOUN"},
      {"game", "NOUN"},
      {"team", "NOUN"},
      {"music", "NOUN"},
      {"song", "NOUN"},
      {"movie", "NOUN"},
      {"news", "NOUN"},
      {"school", "NOUN"},
      {"city", "NOUN"},
      {"country", "NOUN"},
      {"water", "NOUN"},
      {"car", "NOUN"},
      {"phone", "NOUN"},
      {"friend", "NOUN"},
      {"family", "NOUN"},
      {"night", "NOUN"},
      {"morning", "NOUN"},
      {"way", "NOUN"},
      {"thing", "NOUN"},
      {"things", "NOUN"},
      {"word", "NOUN"},
      {"show", "NOUN"},
      {"video", "NOUN"},
      {"party", "NOUN"},
      {"war", "NOUN"},
      {"vaccine", "NOUN"},
      {"virus", "NOUN"},
      {"market", "NOUN"},
      {"stock", "NOUN"},
      {"price", "NOUN"},
      {"coin", "NOUN"},
      {"season", "NOUN"},
      {"episode", "NOUN"},
      {"fan", "NOUN"},
      {"fans", "NOUN"},
      {"name", "NOUN"},
      {"head", "NOUN"},
      {"hand", "NOUN"},
      {"eye", "NOUN"},
      {"face", "NOUN"},
      {"heart", "NOUN"},
      {"love", "NOUN"},
      {"work", "NOUN"},
      {"job", "NOUN"},
      {"story", "NOUN"},
      {"place", "NOUN"},
      {"room", "NOUN"},
      {"food", "NOUN"},
      {"book", "NOUN"},
      {"tweet", "NOUN"},
      {"bat", "NOUN"},
      {"ball", "NOUN"},
      {"mouse", "NOUN"},
      {"plant", "NOUN"},
      {"apple", "NOUN"},
      {"cell", "NOUN"},
      // frequent verbs
      {"go", "VERB"},
      {"goes", "VERB"},
      {"went", "VERB"},
      {"gone", "VERB"},
      {"get", "VERB"},
      {"got", "VERB"},
      {"make", "VERB"},
      {"made", "VERB"},
      {"know", "VERB"},
      {"knew", "VERB"},
      {"think", "VERB"},
      {"thought", "VERB"},
      {"take", "VERB"},
      {"took", "VERB"},
      {"see", "VERB"},
      {"saw", "VERB"},
      {"seen", "VERB"},
      {"come", "VERB"},
      {"came", "VERB"},
      {"want", "VERB"},
      {"look", "VERB"},
      {"use", "VERB"},
      {"find", "VERB"},
      {"found", "VERB"},
      {"give", "VERB"},
      {"gave", "VERB"},
      {"tell", "VERB"},
      {"told", "VERB"},
      {"say", "VERB"},
      {"said", "VERB"},
      {"says", "VERB"},
      {"feel", "VERB"},
      {"felt", "VERB"},
      {"leave", "VERB"},
      {"left", "VERB"},
      {"call", "VERB"},
      {"need", "VERB"},
      {"keep", "VERB"},
      {"let", "VERB"},
      {"put", "VERB"},
      {"watch", "VERB"},
      {"play", "VERB"},
      {"run", "VERB"},
      {"ran", "VERB"},
      {"sleep", "VERB"},
      {"eat", "VERB"},
      {"buy", "VERB"},
      {"bought", "VERB"},
      {"sell", "VERB"},
      {"sold", "VERB"},
      {"win", "VERB"},
      {"won", "VERB"},
      {"lose", "VERB"},
      {"lost", "VERB"},
      {"read", "VERB"},
      {"write", "VERB"},
      {"wrote", "VERB"},
      {"stop", "VERB"},
      {"start", "VERB"},
      {"try", "VERB"},
      {"help", "VERB"},
      // frequent adjectives
      {"good", "ADJ"},
      {"bad", "ADJ"},
      {"new", "ADJ"},
      {"old", "ADJ"},
      {"big", "ADJ"},
      {"small", "ADJ"},
      {"great", "ADJ"},
      {"little", "ADJ"},
      {"long", "ADJ"},
      {"high", "ADJ"},
      {"low", "ADJ"},
      {"first", "ADJ"},
      {"last", "ADJ"},
      {"best", "ADJ"},
      {"better", "ADJ"},
      {"worst", "ADJ"},
      {"same", "ADJ"},
      {"different", "ADJ"},
      {"other", "ADJ"},
      {"many", "ADJ"},
      {"few", "ADJ"},
      {"happy", "ADJ"},
      {"sad", "ADJ"},
      {"real", "ADJ"},
      {"free", "ADJ"},
      {"hot", "ADJ"},
      {"cold", "ADJ"},
      {"nice", "ADJ"},
      {"full", "ADJ"},
      {"sure", "ADJ"},
      {"right", "ADJ"},
      {"wrong", "ADJ"},
      {"whole", "ADJ"},
      {"next", "ADJ"},
      {"young", "ADJ"},
      {"late", "ADJ"},
      {"early", "ADJ"},
  };
  return kLexicon;
}

// Deterministic tagger: lexicon lookup, then shape rules, then suffix rules,
// falling back to X. Other taggers can stand in through the same tag() call.
class PosTagger {
 public:
  PosTagger() {
    for (const auto& [w, t] : builtin_pos_lexicon()) lexicon_[std::string(w)] = upos_id(t);
  }

  // Lexicon file: "word<TAB>TAG" per line; entries override the builtin ones.
  static PosTagger with_lexicon_file(const std::filesystem::path& path) {
    PosTagger tagger;
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open POS lexicon " + path.string());
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (line.empty()) continue;
      const auto tab = line.find('\t');
      if (tab == std::string::npos) {
        throw DataError(path.string() + ":" + std::to_string(line_no) + ": expected word<TAB>TAG");
      }
      tagger.lexicon_[utf8::to_lower(std::string_view(line).substr(0, tab))] = upos_id(line.substr(tab + 1));
    }
    return tagger;
  }

  int tag_word(std::string_view word) const {
    const std::string lower = utf8::to_lower(word);
    if (auto it = lexicon_.find(lower); it != lexicon_.end()) return it->second;
    const std::u32string w = utf8::decode(word);
    if (w.empty()) return kUnknownTag;

    bool all_digits = true;
    bool all_punct = true;
    bool has_digit = false;
    for (char32_t c : w) {
      const bool digit = utf8::is_ascii_digit(c);
      has_digit |= digit;
      if (!digit && c != U'.' && c != U',' && c != U'%') all_digits = false;
      if (utf8::is_word_char(c) || c >= 0x80) all_punct = false;
    }
    if (all_digits && has_digit) return upos_id("NUM");
    if (all_punct) {
      if (w.size() == 1 && (w[0] == U'$' || w[0] == U'%' || w[0] == U'+' || w[0] == U'=' || w[0] == U'&')) {
        return upos_id("SYM");
      }
      return upos_id("PUNCT");
    }
    if (w[0] == U'#' || w[0] == U'@') return upos_id("X");
    if (lower.rfind("http", 0) == 0 || lower.rfind("www.", 0) == 0) return upos_id("X");

    static const std::array<std::pair<std::string_view, std::string_view>, 22> kSuffixes = {{
        {"ly", "ADV"},    {"ing", "VERB"},  {"ed", "VERB"},   {"ize", "VERB"},  {"ise", "VERB"}, {"ify", "VERB"},
        {"tion", "NOUN"}, {"sion", "NOUN"}, {"ment", "NOUN"}, {"ness", "NOUN"}, {"ity", "NOUN"}, {"ship", "NOUN"},
        {"ism", "NOUN"},  {"ist", "NOUN"},  {"er", "NOUN"},   {"ous", "ADJ"},   {"ful", "ADJ"},  {"able", "ADJ"},
        {"ible", "ADJ"},  {"ive", "ADJ"},   {"less", "ADJ"},  {"ical", "ADJ"},
    }};
    constexpr std::size_t kMinStem = 3;
    for (const auto& [suffix, tag] : kSuffixes) {
      if (lower.size() >= suffix.size() + kMinStem &&
          lower.compare(lower.size() - suffix.size(), suffix.size(), suffix) == 0) {
        return upos_id(tag);
      }
    }
    if (utf8::is_ascii_alpha(w[0]) && w[0] >= U'A' && w[0] <= U'Z') return upos_id("PROPN");
    return kUnknownTag;
  }

  PosSequence tag(const std::vector<std::string>& words) const {
    if (words.empty()) throw DataError("pos_tag: empty word list");
    PosSequence seq;
    seq.tags.reserve(words.size());
    for (const auto& w : words) seq.tags.push_back(tag_word(w));
    return seq;
  }

 private:
  std::unordered_map<std::string, int> lexicon_;
};

// ---------------------------------------------------------------------------
// Static word vectors (GloVe text format)
// ---------------------------------------------------------------------------

enum class OovPolicy { kZero, kRandomNormal };

class StaticEmbeddingTable {
 public:
  StaticEmbeddingTable(std::size_t dim, OovPolicy policy = OovPolicy::kZero, std::uint64_t seed = 0)
      : dim_(dim), policy_(policy), seed_(seed) {}

  std::size_t dim() const { return dim_; }
  std::size_t size() const { return vectors_.size(); }
  std::size_t n_malformed() const { return n_malformed_; }
  bool contains(const std::string& word) const { return vectors_.count(word) != 0; }

  void insert(std::string word, std::vector<float> v) {
    if (v.size() != dim_) throw DataError("vector for '" + word + "' has wrong dimension");
    vectors_[std::move(word)] = std::move(v);
  }

  std::vector<float> lookup(const std::string& word) const {
    if (auto it = vectors_.find(word); it != vectors_.end()) return it->second;
    std::vector<float> v(dim_, 0.0f);
    if (policy_ == OovPolicy::kRandomNormal) {
      Rng rng(derive_seed(seed_, stable_hash(word)));
      std::normal_distribution<float> dist(0.0f, 0.1f);
      for (auto& x : v) x = dist(rng);
    }
    return v;
  }

  // Lines that do not parse (no value fields, non-numeric values) are counted
  // and skipped. A well-formed line of the wrong width is an error. A leading
  // "<count> <dim>" header line is ignored.
  static StaticEmbeddingTable load(const std::filesystem::path& path, std::size_t dim,
                                   OovPolicy policy = OovPolicy::kZero, std::uint64_t seed = 0) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open embeddings " + path.string());
    StaticEmbeddingTable table(dim, policy, seed);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      if (!line.empty() && line.back() == '\r') line.pop_back();
      std::istringstream ss(line);
      std::string word;
      if (!(ss >> word)) {
        ++table.n_malformed_;
        continue;
      }
      std::vector<float> values;
      std::string field;
      bool numeric = true;
      while (ss >> field) {
        try {
          std::size_t used = 0;
          const float v = std::stof(field, &used);
          if (used != field.size()) numeric = false;
          values.push_back(v);
        } catch (const std::logic_error&) {
          numeric = false;
        }
      }
      if (!numeric || values.empty()) {
        ++table.n_malformed_;
        continue;
      }
      if (line_no == 1 && values.size() == 1 && word.find_first_not_of("0123456789") == std::string::npos &&
          static_cast<std::size_t>(values[0]) == dim) {
        continue;
      }
      if (values.size() != dim) {
        throw DataError(path.string() + ":" + std::to_string(line_no) + ": expected " + std::to_string(dim) +
                        " values, got " + std::to_string(values.size()));
      }
      table.vectors_[word] = std::move(values);
    }
    return table;
  }

 private:
  std::size_t dim_;
  OovPolicy policy_;
  std::uint64_t seed_;
  std::size_t n_malformed_ = 0;
  std::unordered_map<std::string, std::vector<float>> vectors_;
};

}  // namespace tempowic
