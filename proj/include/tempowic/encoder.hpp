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
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "tempowic/core.hpp"

namespace tempowic {

struct EncoderConfig {
  int vocab_size = 0;
  int d = 64;
  int n_layers = 2;
  std::uint64_t seed = 0;
};

template <typename T>
struct EncoderOutput {
  Matrix<T> hidden;  // seq_len x d
  Vector<T> e_cls;   // hidden row at the CLS position
};

// Sinusoidal position table, scaled so token identity dominates.
template <typename T>
Matrix<T> sinusoidal_positions(Eigen::Index n, Eigen::Index d, double scale = 0.1) {
  Matrix<T> p(n, d);
  for (Eigen::Index pos = 0; pos < n; ++pos) {
    for (Eigen::Index i = 0; i < d; i += 2) {
      const double freq = std::pow(10000.0, -static_cast<double>(i) / static_cast<double>(d));
      p(pos, i) = static_cast<T>(scale * std::sin(pos * freq));
      if (i + 1 < d) p(pos, i + 1) = static_cast<T>(scale * std::cos(pos * freq));
    }
  }
  return p;
}

// Small trainable contextual encoder. Each layer computes
//   ctx = mean_t x_t
//   y_t = x_t + tanh(W x_t + U ctx + b)
// on top of token embeddings plus sinusoidal positions.
template <typename T>
class ReferenceEncoder {
 public:
  struct Cache {
    std::vector<int> ids;
    std::vector<Matrix<T>> inputs;       // layer inputs, n_layers entries
    std::vector<Vector<T>> contexts;     // per-layer mean context
    std::vector<Matrix<T>> activations;  // tanh outputs per layer
  };

  explicit ReferenceEncoder(const EncoderConfig& cfg) : cfg_(cfg) {
    if (cfg.vocab_size <= 0) throw ConfigError("encoder vocab_size must be positive");
    if (cfg.d <= 0 || cfg.d % 2 != 0) throw ConfigError("encoder hidden size d must be positive and even");
    if (cfg.n_layers < 1) throw ConfigError("encoder n_layers must be at least 1");
    Rng rng(derive_seed(cfg.seed, 101));
    embedding_ = Parameter<T>("encoder.embedding", cfg.vocab_size, cfg.d, ParamGroup::kEncoder, true);
    fill_normal(embedding_.value, rng, 0.5);
    const double wstd = 1.0 / std::sqrt(static_cast<double>(cfg.d));
    for (int l = 0; l < cfg.n_layers; ++l) {
      const std::string p = "encoder.layer" + std::to_string(l) + ".";
      Layer layer{Parameter<T>(p + "weight", cfg.d, cfg.d, ParamGroup::kEncoder, true),
                  Parameter<T>(p + "context_weight", cfg.d, cfg.d, ParamGroup::kEncoder, true),
                  Parameter<T>(p + "bias", 1, cfg.d, ParamGroup::kEncoder, false)};
      fill_normal(layer.weight.value, rng, wstd);
      fill_normal(layer.context_weight.value, rng, wstd);
      layers_.push_back(std::move(layer));
    }
  }

  const EncoderConfig& config() const { return cfg_; }
  int hidden_size() const { return cfg_.d; }

  Parameter<T>& embedding_table() { return embedding_; }
  const Parameter<T>& embedding_table() const { return embedding_; }

  void collect(ParamList<T>& out) {
    out.push_back(&embedding_);
    for (auto& l : layers_) {
      out.push_back(&l.weight);
      out.push_back(&l.context_weight);
      out.push_back(&l.bias);
    }
  }

  EncoderOutput<T> encode(std::span<const int> ids, Cache* cache = nullptr) const {
    if (ids.empty()) throw DataError("encode: empty token sequence");
    const auto n = static_cast<Eigen::Index>(ids.size());
    Matrix<T> x = sinusoidal_positions<T>(n, cfg_.d);
    for (Eigen::Index t = 0; t < n; ++t) x.row(t) += embedding_.value.row(checked_id(ids[t]));
    if (cache) {
      cache->ids.assign(ids.begin(), ids.end());
      cache->inputs.clear();
      cache->contexts.clear();
      cache->activations.clear();
    }
    for (const auto& layer : layers_) {
      const Vector<T> ctx = x.colwise().mean().transpose();
      Matrix<T> pre = x * layer.weight.value.transpose();
      const Vector<T> shift = layer.context_weight.value * ctx + layer.bias.value.row(0).transpose();
      pre.rowwise() += shift.transpose();
      Matrix<T> act = pre.array().tanh().matrix();
      if (cache) {
        cache->inputs.push_back(x);
        cache->contexts.push_back(ctx);
        cache->activations.push_back(act);
      }
      x += act;
    }
    EncoderOutput<T> out;
    out.e_cls = x.row(0).transpose();
    out.hidden = std::move(x);
    return out;
  }

  // Padded batch forward. Rows past a sequence's length are computed but
  // masked out of the context mean; callers ignore them.
  std::vector<Matrix<T>> encode_batch(const std::vector<std::vector<int>>& batch) const {
    const auto b = static_cast<Eigen::Index>(batch.size());
    Eigen::Index max_len = 0;
    for (const auto& s : batch) max_len = std::max<Eigen::Index>(max_len, static_cast<Eigen::Index>(s.size()));
    const Matrix<T> pos = sinusoidal_positions<T>(max_len, cfg_.d);
    Matrix<T> x = Matrix<T>::Zero(b * max_len, cfg_.d);
    Matrix<T> mask = Matrix<T>::Zero(b, b * max_len);  // averaging operator
    for (Eigen::Index i = 0; i < b; ++i) {
      const auto& ids = batch[static_cast<std::size_t>(i)];
      if (ids.empty()) throw DataError("encode_batch: empty token sequence");
      for (Eigen::Index t = 0; t < max_len; ++t) {
        const bool real = t < static_cast<Eigen::Index>(ids.size());
        const int id = real ? ids[static_cast<std::size_t>(t)] : kPadId;
        x.row(i * max_len + t) = embedding_.value.row(checked_id(id)) + pos.row(t);
        if (real) mask(i, i * max_len + t) = T(1) / static_cast<T>(ids.size());
      }
    }
    for (const auto& layer : layers_) {
      const Matrix<T> ctx = mask * x;  // b x d
      const Matrix<T> shift = ctx * layer.context_weight.value.transpose();
      Matrix<T> pre = x * layer.weight.value.transpose();
      for (Eigen::Index i = 0; i < b; ++i) {
        for (Eigen::Index t = 0; t < max_len; ++t) {
          pre.row(i * max_len + t) += shift.row(i) + layer.bias.value.row(0);
        }
      }
      x += pre.array().tanh().matrix();
    }
    std::vector<Matrix<T>> out;
    for (Eigen::Index i = 0; i < b; ++i) {
      const auto len = static_cast<Eigen::Index>(batch[static_cast<std::size_t>(i)].size());
      out.push_back(x.middleRows(i * max_len, len));
    }
    return out;
  }

  // Accumulates parameter gradients given d(loss)/d(hidden).
  void backward(const Cache& cache, const Matrix<T>& d_hidden) {
    Matrix<T> dx = d_hidden;
    const auto n = static_cast<T>(cache.ids.size());
    for (int l = static_cast<int>(layers_.size()) - 1; l >= 0; --l) {
      auto& layer = layers_[static_cast<std::size_t>(l)];
      const Matrix<T>& x = cache.inputs[static_cast<std::size_t>(l)];
      const Matrix<T>& act = cache.activations[static_cast<std::size_t>(l)];
      const Vector<T>& ctx = cache.contexts[static_cast<std::size_t>(l)];
      const Matrix<T> d_pre = (dx.array() * (T(1) - act.array().square())).matrix();
      const Vector<T> d_shift = d_pre.colwise().sum().transpose();
      layer.weight.grad.noalias() += d_pre.transpose() * x;
      layer.bias.grad.row(0) += d_shift.transpose();
      layer.context_weight.grad.noalias() += d_shift * ctx.transpose();
      const Vector<T> d_ctx = layer.context_weight.value.transpose() * d_shift;
      Matrix<T> d_in = dx + d_pre * layer.weight.value;
      d_in.rowwise() += (d_ctx / n).transpose();
      dx = std::move(d_in);
    }
    for (std::size_t t = 0; t < cache.ids.size(); ++t) {
      embedding_.grad.row(cache.ids[t]) += dx.row(static_cast<Eigen::Index>(t));
    }
  }

 private:
  struct Layer {
    Parameter<T> weight;
    Parameter<T> context_weight;
    Parameter<T> bias;
  };

  int checked_id(int id) const {
    if (id < 0 || id >= cfg_.vocab_size) {
      throw DataError("token id " + std::to_string(id) + " out of range for vocabulary of size " +
                      std::to_string(cfg_.vocab_size));
    }
    return id;
  }

  EncoderConfig cfg_;
  Parameter<T> embedding_;
  std::vector<Layer> layers_;
};

}  // namespace tempowic
