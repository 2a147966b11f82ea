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

#include <cmath>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "tempowic/core.hpp"
#include "tempowic/lexical.hpp"

namespace tempowic {

// One LSTM direction with gate order (input, forget, cell, output).
template <typename T>
class LstmDirection {
 public:
  struct Step {
    Vector<T> x, h_prev, c_prev, i, f, g, o, c, tanh_c;
  };

  LstmDirection() = default;
  LstmDirection(const std::string& prefix, int input_dim, int hidden, ParamGroup group, Rng& rng)
      : hidden_(hidden),
        wx_(prefix + "input_weight", 4 * hidden, input_dim, group, true),
        wh_(prefix + "hidden_weight", 4 * hidden, hidden, group, true),
        b_(prefix + "bias", 1, 4 * hidden, group, false) {
    const double std = 1.0 / std::sqrt(static_cast<double>(hidden));
    fill_normal(wx_.value, rng, std);
    fill_normal(wh_.value, rng, std);
    b_.value.block(0, hidden, 1, hidden).setOnes();  // forget-gate bias
  }

  void collect(ParamList<T>& out) {
    out.push_back(&wx_);
    out.push_back(&wh_);
    out.push_back(&b_);
  }

  // Runs over inputs.row(order[0]), inputs.row(order[1]), ...; returns the
  // final hidden state.
  Vector<T> run(const Matrix<T>& inputs, const std::vector<Eigen::Index>& order, std::vector<Step>* steps) const {
    const Eigen::Index h = hidden_;
    Vector<T> hs = Vector<T>::Zero(h);
    Vector<T> cs = Vector<T>::Zero(h);
    if (steps) steps->clear();
    for (Eigen::Index r : order) {
      Step s;
      s.x = inputs.row(r).transpose();
      s.h_prev = hs;
      s.c_prev = cs;
      const Vector<T> z = wx_.value * s.x + wh_.value * hs + b_.value.row(0).transpose();
      s.i = z.segment(0, h).unaryExpr([](T v) { return sigmoid(v); });
      s.f = z.segment(h, h).unaryExpr([](T v) { return sigmoid(v); });
      s.g = z.segment(2 * h, h).array().tanh().matrix();
      s.o = z.segment(3 * h, h).unaryExpr([](T v) { return sigmoid(v); });
      s.c = (s.f.array() * s.c_prev.array() + s.i.array() * s.g.array()).matrix();
      s.tanh_c = s.c.array().tanh().matrix();
      hs = (s.o.array() * s.tanh_c.array()).matrix();
      cs = s.c;
      if (steps) steps->push_back(std::move(s));
    }
    return hs;
  }

  // Backpropagates d(final h) through the recorded steps, accumulating
  // parameter gradients and adding input gradients into d_inputs.
  void backward(const std::vector<Step>& steps, const std::vector<Eigen::Index>& order, const Vector<T>& d_final,
                Matrix<T>& d_inputs) {
    const Eigen::Index h = hidden_;
    Vector<T> dh = d_final;
    Vector<T> dc = Vector<T>::Zero(h);
    for (std::size_t k = steps.size(); k-- > 0;) {
      const Step& s = steps[k];
      const auto d_o = (dh.array() * s.tanh_c.array()).eval();
      const auto dct = (dc.array() + dh.array() * s.o.array() * (T(1) - s.tanh_c.array().square())).eval();
      Vector<T> dz(4 * h);
      dz.segment(0, h) = (dct * s.g.array() * s.i.array() * (T(1) - s.i.array())).matrix();
      dz.segment(h, h) = (dct * s.c_prev.array() * s.f.array() * (T(1) - s.f.array())).matrix();
      dz.segment(2 * h, h) = (dct * s.i.array() * (T(1) - s.g.array().square())).matrix();
      dz.segment(3 * h, h) = (d_o * s.o.array() * (T(1) - s.o.array())).matrix();
      wx_.grad.noalias() += dz * s.x.transpose();
      wh_.grad.noalias() += dz * s.h_prev.transpose();
      b_.grad.row(0) += dz.transpose();
      d_inputs.row(order[k]) += (wx_.value.transpose() * dz).transpose();
      dh = wh_.value.transpose() * dz;
      dc = (dct * s.f.array()).matrix();
    }
  }

  void copy_weights_from(const LstmDirection& other) {
    wx_.value = other.wx_.value;
    wh_.value = other.wh_.value;
    b_.value = other.b_.value;
  }

 private:
  Eigen::Index hidden_ = 0;
  Parameter<T> wx_;
  Parameter<T> wh_;
  Parameter<T> b_;
};

struct BiLstmConfig {
  int input_dim = 0;
  int hidden = 1024;
  int output_dim = 0;
};

// Bidirectional LSTM read out at one position: [h_fwd(t); h_bwd(t)] followed
// by a linear projection to output_dim. Only the steps that can influence
// position t are computed (0..t forward, n-1..t backward).
template <typename T>
class BiLstm {
 public:
  struct Cache {
    std::vector<typename LstmDirection<T>::Step> fwd_steps, bwd_steps;
    std::vector<Eigen::Index> fwd_order, bwd_order;
    Vector<T> hidden;
    Eigen::Index n_rows = 0;
  };

  BiLstm() = default;
  BiLstm(const std::string& prefix, const BiLstmConfig& cfg, ParamGroup group, Rng& rng) : cfg_(cfg) {
    if (cfg.input_dim <= 0 || cfg.hidden <= 0 || cfg.output_dim <= 0) {
      throw ConfigError(prefix + ": BiLSTM dimensions must be positive");
    }
    fwd_ = LstmDirection<T>(prefix + "fwd.", cfg.input_dim, cfg.hidden, group, rng);
    bwd_ = LstmDirection<T>(prefix + "bwd.", cfg.input_dim, cfg.hidden, group, rng);
    proj_w_ = Parameter<T>(prefix + "proj.weight", cfg.output_dim, 2 * cfg.hidden, group, true);
    proj_b_ = Parameter<T>(prefix + "proj.bias", 1, cfg.output_dim, group, false);
    fill_normal(proj_w_.value, rng, 1.0 / std::sqrt(2.0 * cfg.hidden));
  }

  const BiLstmConfig& config() const { return cfg_; }

  void collect(ParamList<T>& out) {
    fwd_.collect(out);
    bwd_.collect(out);
    out.push_back(&proj_w_);
    out.push_back(&proj_b_);
  }

  // [h_fwd(t); h_bwd(t)] before projection.
  Vector<T> hidden_at(const Matrix<T>& inputs, Eigen::Index target, Cache* cache = nullptr) const {
    check_dim(inputs.cols(), cfg_.input_dim, "bilstm input");
    if (target < 0 || target >= inputs.rows()) {
      throw DataError("bilstm: target index " + std::to_string(target) + " outside sequence of length " +
                      std::to_string(inputs.rows()));
    }
    std::vector<Eigen::Index> fwd_order;
    std::vector<Eigen::Index> bwd_order;
    for (Eigen::Index r = 0; r <= target; ++r) fwd_order.push_back(r);
    for (Eigen::Index r = inputs.rows() - 1; r >= target; --r) bwd_order.push_back(r);
    Vector<T> out(2 * cfg_.hidden);
    out.head(cfg_.hidden) = fwd_.run(inputs, fwd_order, cache ? &cache->fwd_steps : nullptr);
    out.tail(cfg_.hidden) = bwd_.run(inputs, bwd_order, cache ? &cache->bwd_steps : nullptr);
    if (cache) {
      cache->fwd_order = std::move(fwd_order);
      cache->bwd_order = std::move(bwd_order);
      cache->hidden = out;
      cache->n_rows = inputs.rows();
    }
    return out;
  }

  Vector<T> encode(const Matrix<T>& inputs, Eigen::Index target, Cache* cache = nullptr) const {
    const Vector<T> h = hidden_at(inputs, target, cache);
    return proj_w_.value * h + proj_b_.value.row(0).transpose();
  }

  // Returns d(loss)/d(inputs).
  Matrix<T> backward(const Cache& cache, const Vector<T>& d_out) {
    proj_w_.grad.noalias() += d_out * cache.hidden.transpose();
    proj_b_.grad.row(0) += d_out.transpose();
    const Vector<T> dh = proj_w_.value.transpose() * d_out;
    Matrix<T> d_inputs = Matrix<T>::Zero(cache.n_rows, cfg_.input_dim);
    fwd_.backward(cache.fwd_steps, cache.fwd_order, dh.head(cfg_.hidden), d_inputs);
    bwd_.backward(cache.bwd_steps, cache.bwd_order, dh.tail(cfg_.hidden), d_inputs);
    return d_inputs;
  }

  // Makes the backward direction share the forward direction's weights.
  void tie_directions() { bwd_.copy_weights_from(fwd_); }

 private:
  BiLstmConfig cfg_;
  LstmDirection<T> fwd_;
  LstmDirection<T> bwd_;
  Parameter<T> proj_w_;
  Parameter<T> proj_b_;
};

// An expert: trainable id embedding followed by a BiLSTM read out at the target
// word. Used for both the POS-tag expert and the static word-vector expert.
template <typename T>
class SequenceExpert {
 public:
  struct Cache {
    std::vector<int> ids;
    typename BiLstm<T>::Cache lstm;
  };

  SequenceExpert() = default;
  SequenceExpert(const std::string& prefix, int n_ids, int embed_dim, int hidden, int output_dim, Rng& rng)
      : embedding_(prefix + "embedding", n_ids, embed_dim, ParamGroup::kExpert, false),
        lstm_(prefix + "bilstm.", BiLstmConfig{embed_dim, hidden, output_dim}, ParamGroup::kExpert, rng) {
    fill_normal(embedding_.value, rng, 0.1);
  }

  Parameter<T>& embedding_table() { return embedding_; }

  void collect(ParamList<T>& out) {
    out.push_back(&embedding_);
    lstm_.collect(out);
  }

  Vector<T> encode(std::span<const int> ids, Eigen::Index target, Cache* cache = nullptr) const {
    if (ids.empty()) throw DataError("expert: empty word sequence");
    Matrix<T> x(static_cast<Eigen::Index>(ids.size()), embedding_.value.cols());
    for (std::size_t k = 0; k < ids.size(); ++k) {
      if (ids[k] < 0 || ids[k] >= embedding_.value.rows()) {
        throw DataError(embedding_.name + ": id " + std::to_string(ids[k]) + " out of range");
      }
      x.row(static_cast<Eigen::Index>(k)) = embedding_.value.row(ids[k]);
    }
    if (cache) cache->ids.assign(ids.begin(), ids.end());
    return lstm_.encode(x, target, cache ? &cache->lstm : nullptr);
  }

  void backward(const Cache& cache, const Vector<T>& d_out) {
    const Matrix<T> dx = lstm_.backward(cache.lstm, d_out);
    for (std::size_t k = 0; k < cache.ids.size(); ++k) {
      embedding_.grad.row(cache.ids[k]) += dx.row(static_cast<Eigen::Index>(k));
    }
  }

 private:
  Parameter<T> embedding_;
  BiLstm<T> lstm_;
};

// Index of the word whose characters overlap [begin, end); the first such word
// when the target spans several.
template <typename WordList>
std::optional<std::size_t> target_word_index(const WordList& words, std::size_t begin, std::size_t end) {
  for (std::size_t i = 0; i < words.size(); ++i) {
    if (words[i].begin < end && begin < words[i].end) return i;
  }
  return std::nullopt;
}

}  // namespace tempowic
