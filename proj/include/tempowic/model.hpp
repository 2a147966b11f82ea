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
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "tempowic/core.hpp"
#include "tempowic/data.hpp"
#include "tempowic/encoder.hpp"
#include "tempowic/experts.hpp"
#include "tempowic/lexical.hpp"
#include "tempowic/matching.hpp"
#include "tempowic/moe.hpp"
#include "tempowic/tokenization.hpp"

namespace tempowic {

struct ModelConfig {
  int vocab_size = 0;  // taken from the vocabulary
  int d = 64;
  int n_layers = 2;
  ReprMode repr = ReprMode::kFirstLast;
  int mlp_hidden = 256;
  GateVariant variant = GateVariant::kNone;
  bool use_pos = true;
  bool use_glove = true;
  int pos_dim = 32;
  int glove_dim = 50;
  int bilstm_hidden = 1024;
  int task_dim = 64;
  MatchConfig match;
  std::uint64_t seed = 0;

  bool moe() const { return variant != GateVariant::kNone; }
  int n_experts() const { return 1 + (use_pos ? 1 : 0) + (use_glove ? 1 : 0); }
  int target_dim() const { return static_cast<int>(repr_dim(repr, d)); }
};

// Word-level view of one text for the recurrent experts.
struct TextFeatures {
  std::vector<int> word_ids;
  std::vector<int> pos_ids;
  std::size_t target_word = 0;
};

struct ModelInput {
  std::string id;
  TokenizedPair tokens;
  TextFeatures text1;
  TextFeatures text2;
  int label = 0;
};

// Turns PairInstances into model inputs: subword layout for the encoder and
// word/POS id sequences for the experts.
class Featurizer {
 public:
  Featurizer(std::shared_ptr<const Tokenizer> tokenizer, Vocabulary word_vocab, PosTagger tagger, std::size_t max_len)
      : tokenizer_(std::move(tokenizer)),
        word_vocab_(std::move(word_vocab)),
        tagger_(std::move(tagger)),
        max_len_(max_len) {}

  const Vocabulary& word_vocab() const { return word_vocab_; }
  const Tokenizer& tokenizer() const { return *tokenizer_; }

  ModelInput operator()(const PairInstance& inst) const {
    ModelInput in;
    in.id = inst.id;
    in.label = inst.label ? 1 : 0;
    in.tokens = tokenize_pair(inst, *tokenizer_, max_len_);
    in.text1 = text_features(inst, inst.text1, inst.span1);
    in.text2 = text_features(inst, inst.text2, inst.span2);
    return in;
  }

  std::vector<ModelInput> operator()(const Dataset& data) const {
    std::vector<ModelInput> out;
    out.reserve(data.size());
    for (const auto& inst : data) out.push_back((*this)(inst));
    return out;
  }

 private:
  TextFeatures text_features(const PairInstance& inst, const std::string& text, const Span& span) const {
    const auto words = split_words(utf8::decode(text));
    if (words.empty()) throw DataError("instance " + inst.id + ": empty text");
    TextFeatures f;
    std::vector<std::string> raw;
    for (const auto& w : words) {
      f.word_ids.push_back(word_vocab_.id(normalize_token(w.text)));
      raw.push_back(utf8::encode(w.text));
    }
    f.pos_ids = tagger_.tag(raw).tags;
    const auto idx = target_word_index(words, span.begin, span.end);
    if (!idx) throw DataError("instance " + inst.id + ": target span overlaps no word");
    f.target_word = *idx;
    return f;
  }

  std::shared_ptr<const Tokenizer> tokenizer_;
  Vocabulary word_vocab_;
  PosTagger tagger_;
  std::size_t max_len_;
};

// Encoder -> target extraction -> (optional MoE over ctx/POS/GloVe experts,
// one gate per tweet) -> matching layer -> MLP classifier.
template <typename T>
class TempoWicModel {
 public:
  struct SideCache {
    ExpertBundle<T> bundle;
    typename SequenceExpert<T>::Cache pos;
    typename SequenceExpert<T>::Cache glove;
    typename Gate<T>::Cache gate;
    GateWeights<T> weights;
  };

  struct Cache {
    typename ReferenceEncoder<T>::Cache encoder;
    Eigen::Index seq_len = 0;
    Vector<T> e_cls;
    SideCache side1, side2;
    Vector<T> mixed1, mixed2;
    typename ClassifierHead<T>::Cache head;
  };

  explicit TempoWicModel(const ModelConfig& cfg) : cfg_(cfg), encoder_(encoder_config(cfg)) {
    if (cfg.moe() && cfg.n_experts() < 2)
      throw ConfigError("moe.variant set but both moe.use_pos and moe.use_glove are off");
    Rng rng(derive_seed(cfg.seed, 202));
    const int m = cfg.target_dim();
    if (cfg.moe()) {
      if (cfg.use_pos) {
        pos_.emplace("expert.pos.", static_cast<int>(PosSequence::tagset_size()), cfg.pos_dim, cfg.bilstm_hidden, m,
                     rng);
      }
      if (cfg.use_glove) {
        glove_.emplace("expert.glove.", cfg.vocab_size, cfg.glove_dim, cfg.bilstm_hidden, m, rng);
      }
      gate1_ = Gate<T>(cfg.variant, "moe.gate1.", m, cfg.n_experts(), cfg.task_dim, rng);
      gate2_ = Gate<T>(cfg.variant, "moe.gate2.", m, cfg.n_experts(), cfg.task_dim, rng);
    }
    head_ = ClassifierHead<T>(static_cast<int>(match_dim(cfg.match, m, cfg.d)), cfg.mlp_hidden, rng);
  }

  const ModelConfig& config() const { return cfg_; }
  ReferenceEncoder<T>& encoder() { return encoder_; }
  ClassifierHead<T>& head() { return head_; }
  Gate<T>& gate1() { return gate1_; }
  Gate<T>& gate2() { return gate2_; }

  ParamList<T> parameters() {
    ParamList<T> out;
    encoder_.collect(out);
    if (pos_) pos_->collect(out);
    if (glove_) glove_->collect(out);
    gate1_.collect(out);
    gate2_.collect(out);
    head_.collect(out);
    return out;
  }

  // Tables that FGM perturbs: the encoder's token embeddings, plus the expert
  // embedding tables when requested.
  ParamList<T> adversarial_targets(bool include_experts = false) {
    ParamList<T> out{&encoder_.embedding_table()};
    if (include_experts) {
      if (pos_) out.push_back(&pos_->embedding_table());
      if (glove_) out.push_back(&glove_->embedding_table());
    }
    return out;
  }

  void zero_grad() {
    for (auto* p : parameters()) p->zero_grad();
  }

  // Copies static vectors into the word-expert embedding; rows for words the
  // table lacks follow the table's OOV policy.
  void init_word_vectors(const Vocabulary& vocab, const StaticEmbeddingTable& table) {
    if (!glove_) return;
    check_dim(static_cast<Eigen::Index>(table.dim()), cfg_.glove_dim, "static word vectors");
    auto& emb = glove_->embedding_table().value;
    for (std::size_t i = kNumReserved; i < vocab.size(); ++i) {
      const auto v = table.lookup(vocab.token(static_cast<int>(i)));
      for (std::size_t k = 0; k < v.size(); ++k)
        emb(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = static_cast<T>(v[k]);
    }
  }

  Vector<T> logits(const ModelInput& in, Cache* cache = nullptr) const {
    const auto enc = encoder_.encode(in.tokens.token_ids, cache ? &cache->encoder : nullptr);
    const Vector<T> e1 = extract_target(enc.hidden, in.tokens.span_tokens1, cfg_.repr);
    const Vector<T> e2 = extract_target(enc.hidden, in.tokens.span_tokens2, cfg_.repr);
    Vector<T> t1 = e1;
    Vector<T> t2 = e2;
    if (cfg_.moe()) {
      t1 = fuse(e1, in.text1, gate1_, cache ? &cache->side1 : nullptr);
      t2 = fuse(e2, in.text2, gate2_, cache ? &cache->side2 : nullptr);
    }
    const Vector<T> features = match_features(t1, t2, enc.e_cls, cfg_.match);
    if (cache) {
      cache->seq_len = enc.hidden.rows();
      cache->e_cls = enc.e_cls;
      cache->mixed1 = t1;
      cache->mixed2 = t2;
    }
    return head_.logits(features, cache ? &cache->head : nullptr);
  }

  Vector<T> probabilities(const ModelInput& in) const { return softmax<T>(logits(in)); }

  // Gate weights for both tweets (MoE models only).
  std::pair<GateWeights<T>, GateWeights<T>> gate_weights(const ModelInput& in) const {
    Cache cache;
    logits(in, &cache);
    return {cache.side1.weights, cache.side2.weights};
  }

  // Accumulates gradients of scale * loss.
  void backward(const ModelInput& in, const Cache& cache, const Vector<T>& d_logits) {
    const Vector<T> d_features = head_.backward(cache.head, d_logits);
    const auto g = match_features_backward(cache.mixed1, cache.mixed2, cache.e_cls.size(), d_features, cfg_.match);
    Vector<T> d_e1 = g.d_e1;
    Vector<T> d_e2 = g.d_e2;
    if (cfg_.moe()) {
      d_e1 = fuse_backward(cache.side1, gate1_, g.d_e1);
      d_e2 = fuse_backward(cache.side2, gate2_, g.d_e2);
    }
    Matrix<T> d_hidden = Matrix<T>::Zero(cache.seq_len, cfg_.d);
    extract_target_backward(d_e1, in.tokens.span_tokens1, cfg_.repr, d_hidden);
    extract_target_backward(d_e2, in.tokens.span_tokens2, cfg_.repr, d_hidden);
    d_hidden.row(static_cast<Eigen::Index>(in.tokens.cls_index)) += g.d_cls.transpose();
    encoder_.backward(cache.encoder, d_hidden);
  }

  // Mean cross-entropy over the batch; gradients of the mean are accumulated.
  T forward_backward(std::span<const ModelInput> batch) {
    if (batch.empty()) return T(0);
    const T scale = T(1) / static_cast<T>(batch.size());
    T total = T(0);
    for (const auto& in : batch) {
      Cache cache;
      const Vector<T> z = logits(in, &cache);
      Vector<T> dz;
      total += cross_entropy_with_logits(z, in.label, &dz);
      backward(in, cache, Vector<T>(dz * scale));
    }
    return total * scale;
  }

  T loss(std::span<const ModelInput> batch) const {
    if (batch.empty()) return T(0);
    T total = T(0);
    for (const auto& in : batch) total += cross_entropy_with_logits(logits(in), in.label);
    return total / static_cast<T>(batch.size());
  }

 private:
  static EncoderConfig encoder_config(const ModelConfig& cfg) {
    return EncoderConfig{cfg.vocab_size, cfg.d, cfg.n_layers, derive_seed(cfg.seed, 1)};
  }

  Vector<T> fuse(const Vector<T>& e_ctx, const TextFeatures& text, const Gate<T>& gate, SideCache* sc) const {
    ExpertBundle<T> bundle;
    bundle.ctx = e_ctx;
    const auto target = static_cast<Eigen::Index>(text.target_word);
    if (pos_) bundle.pos = pos_->encode(text.pos_ids, target, sc ? &sc->pos : nullptr);
    if (glove_) bundle.glove = glove_->encode(text.word_ids, target, sc ? &sc->glove : nullptr);
    GateWeights<T> w = gate.forward(bundle, sc ? &sc->gate : nullptr);
    Vector<T> out = mix(bundle, w);
    if (sc) {
      sc->bundle = std::move(bundle);
      sc->weights = std::move(w);
    }
    return out;
  }

  // Returns d(loss)/d(e_ctx).
  Vector<T> fuse_backward(const SideCache& sc, Gate<T>& gate, const Vector<T>& d_out) {
    const auto mg = mix_backward(sc.bundle, sc.weights, d_out);
    const auto dg = gate.backward(sc.gate, mg.d_w);
    const auto kinds = sc.bundle.kinds();
    Vector<T> d_ctx;
    for (std::size_t i = 0; i < kinds.size(); ++i) {
      const Vector<T> d = mg.d_experts[i] + dg[i];
      switch (kinds[i]) {
        case ExpertKind::kContext:
          d_ctx = d;
          break;
        case ExpertKind::kPos:
          pos_->backward(sc.pos, d);
          break;
        case ExpertKind::kGlove:
          glove_->backward(sc.glove, d);
          break;
      }
    }
    return d_ctx;
  }

  ModelConfig cfg_;
  ReferenceEncoder<T> encoder_;
  std::optional<SequenceExpert<T>> pos_;
  std::optional<SequenceExpert<T>> glove_;
  Gate<T> gate1_;
  Gate<T> gate2_;
  ClassifierHead<T> head_;
};

}  // namespace tempowic
