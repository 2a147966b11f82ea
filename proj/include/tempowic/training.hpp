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
#include <functional>
#include <numeric>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "tempowic/adversarial.hpp"
#include "tempowic/core.hpp"
#include "tempowic/evaluation.hpp"
#include "tempowic/model.hpp"

namespace tempowic {

struct TrainConfig {
  std::size_t batch_size = 8;
  std::size_t max_len = 256;
  double lr_encoder = 1e-6;  // encoder and classifier head
  double lr_bilstm = 1e-4;   // recurrent experts and gates
  double warmup_ratio = 0.10;
  int epochs = 20;
  std::uint64_t seed = 0;
  int early_stop_patience = 5;
  double weight_decay = 0.01;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double adam_epsilon = 1e-8;
  FgmConfig fgm;

  void validate() const {
    if (batch_size == 0) throw ConfigError("train.batch_size must be positive");
    if (!(lr_encoder > 0.0)) throw ConfigError("train.lr_encoder must be positive");
    if (!(lr_bilstm > 0.0)) throw ConfigError("train.lr_bilstm must be positive");
    if (!(warmup_ratio >= 0.0 && warmup_ratio < 1.0)) throw ConfigError("train.warmup_ratio must be in [0, 1)");
    if (epochs < 1) throw ConfigError("train.epochs must be at least 1");
    if (early_stop_patience < 1) throw ConfigError("train.patience must be at least 1");
    if (weight_decay < 0.0) throw ConfigError("train.weight_decay must be non-negative");
    if (fgm.epsilon < 0.0) throw ConfigError("fgm.epsilon must be non-negative");
  }
};

// Linear warmup from 0 to base_lr over the first warmup_ratio * total_steps
// steps, then linear decay to 0 at total_steps.
inline double lr_schedule(std::size_t step, std::size_t total_steps, double base_lr, double warmup_ratio) {
  if (total_steps == 0) return base_lr;
  const double s = static_cast<double>(std::min(step, total_steps));
  const double total = static_cast<double>(total_steps);
  const double warmup = warmup_ratio * total;
  if (s < warmup) return base_lr * s / warmup;
  if (total <= warmup) return base_lr;
  return base_lr * (total - s) / (total - warmup);
}

// Adam with decoupled weight decay. Parameters flagged decay=false (biases,
// gate task vectors, embedding tables of the experts) are not decayed.
template <typename T>
class AdamW {
 public:
  AdamW(double beta1, double beta2, double epsilon, double weight_decay)
      : beta1_(beta1), beta2_(beta2), eps_(epsilon), decay_(weight_decay) {}

  void step(const ParamList<T>& params, double lr_encoder, double lr_expert) {
    if (moments_.empty()) {
      for (auto* p : params) {
        moments_.push_back(
            {Matrix<T>::Zero(p->value.rows(), p->value.cols()), Matrix<T>::Zero(p->value.rows(), p->value.cols())});
      }
    }
    if (moments_.size() != params.size()) throw ConfigError("AdamW: parameter list changed between steps");
    ++t_;
    const T b1 = static_cast<T>(beta1_);
    const T b2 = static_cast<T>(beta2_);
    const T c1 = static_cast<T>(1.0 - std::pow(beta1_, static_cast<double>(t_)));
    const T c2 = static_cast<T>(1.0 - std::pow(beta2_, static_cast<double>(t_)));
    const T eps = static_cast<T>(eps_);
    for (std::size_t i = 0; i < params.size(); ++i) {
      auto& p = *params[i];
      auto& [m, v] = moments_[i];
      const T lr = static_cast<T>(p.group == ParamGroup::kEncoder ? lr_encoder : lr_expert);
      if (p.decay && decay_ > 0.0) p.value *= T(1) - lr * static_cast<T>(decay_);
      m = b1 * m + (T(1) - b1) * p.grad;
      v = b2 * v + (T(1) - b2) * p.grad.cwiseProduct(p.grad);
      p.value.array() -= lr * (m.array() / c1) / ((v.array() / c2).sqrt() + eps);
    }
  }

  std::size_t steps_taken() const { return t_; }

 private:
  struct Moments {
    Matrix<T> m;
    Matrix<T> v;
  };
  double beta1_, beta2_, eps_, decay_;
  std::size_t t_ = 0;
  std::vector<Moments> moments_;
};

struct EpochRecord {
  int epoch = 0;
  double train_loss = 0.0;
  double adversarial_loss = 0.0;
  double train_accuracy = 0.0;
  double dev_accuracy = 0.0;
  double dev_macro_f1 = 0.0;

  bool operator==(const EpochRecord&) const = default;
};

template <typename T>
using ParamSnapshot = std::vector<Matrix<T>>;

template <typename T>
ParamSnapshot<T> snapshot(const ParamList<T>& params) {
  ParamSnapshot<T> s;
  for (const auto* p : params) s.push_back(p->value);
  return s;
}

template <typename T>
void restore(const ParamList<T>& params, const ParamSnapshot<T>& s) {
  for (std::size_t i = 0; i < params.size(); ++i) params[i]->value = s[i];
}

template <typename T>
struct TrainResult {
  ParamSnapshot<T> best_params;
  std::vector<EpochRecord> history;
  int best_epoch = 0;
  MetricsReport best_dev;
  bool stopped_early = false;
};

template <typename T>
std::vector<PredictionRecord> predict(const TempoWicModel<T>& model, const std::vector<ModelInput>& inputs) {
  std::vector<PredictionRecord> out;
  out.reserve(inputs.size());
  for (const auto& in : inputs) {
    out.push_back(PredictionRecord::from_probability(in.id, static_cast<double>(model.probabilities(in)(1))));
  }
  return out;
}

inline MetricsReport score_inputs(const std::vector<PredictionRecord>& preds, const std::vector<ModelInput>& inputs) {
  std::vector<bool> p;
  std::vector<bool> g;
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    p.push_back(preds[i].predicted);
    g.push_back(inputs[i].label == 1);
  }
  return score(p, g);
}

namespace detail {

template <typename T>
[[noreturn]] void numeric_failure(const std::string& what, int epoch, std::size_t step, const ParamList<T>& params) {
  std::ostringstream msg;
  msg << what << " at epoch " << epoch << ", step " << step << "; parameter state:";
  for (const auto* p : params) {
    msg << "\n  " << p->name << " |value|=" << static_cast<double>(p->value.norm())
        << " |grad|=" << static_cast<double>(p->grad.norm());
  }
  throw NumericError(msg.str());
}

}  // namespace detail

using EpochCallback = std::function<void(const EpochRecord&)>;

// Mini-batch training with per-epoch shuffling, warmup/decay schedule on two
// parameter groups, optional FGM, and early stopping on dev macro-F1. On
// return the model holds the best-on-dev parameters.
template <typename T>
TrainResult<T> train(TempoWicModel<T>& model, const std::vector<ModelInput>& train_set,
                     const std::vector<ModelInput>& dev_set, const TrainConfig& cfg,
                     const EpochCallback& on_epoch = {}) {
  cfg.validate();
  if (train_set.empty()) throw DataError("train: empty training set");
  if (dev_set.empty()) throw DataError("train: empty dev set");
  const ParamList<T> params = model.parameters();
  AdamW<T> opt(cfg.beta1, cfg.beta2, cfg.adam_epsilon, cfg.weight_decay);
  Rng rng(derive_seed(cfg.seed, 7));

  const std::size_t n = train_set.size();
  const std::size_t batches = (n + cfg.batch_size - 1) / cfg.batch_size;
  const std::size_t total_steps = batches * static_cast<std::size_t>(cfg.epochs);
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});

  TrainResult<T> result;
  result.best_dev.macro_f1 = -1.0;
  std::size_t step = 0;
  std::vector<ModelInput> batch;
  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    // Fisher-Yates with an explicit draw so the order does not depend on the
    // standard library's shuffle implementation.
    for (std::size_t i = n; i > 1; --i) {
      const std::size_t j = static_cast<std::size_t>(rng() % i);
      std::swap(order[i - 1], order[j]);
    }
    double loss_sum = 0.0;
    double adv_sum = 0.0;
    for (std::size_t b = 0; b < batches; ++b) {
      batch.clear();
      for (std::size_t k = b * cfg.batch_size; k < std::min(n, (b + 1) * cfg.batch_size); ++k) {
        batch.push_back(train_set[order[k]]);
      }
      model.zero_grad();
      const T loss = model.forward_backward(std::span<const ModelInput>(batch));
      if (!std::isfinite(static_cast<double>(loss))) detail::numeric_failure("non-finite loss", epoch, step, params);
      loss_sum += static_cast<double>(loss);
      if (cfg.fgm.enabled) {
        const auto adv = fgm_step(model, batch, cfg.fgm);
        if (!std::isfinite(static_cast<double>(adv.adversarial_loss))) {
          detail::numeric_failure("non-finite adversarial loss", epoch, step, params);
        }
        adv_sum += static_cast<double>(adv.adversarial_loss);
      }
      opt.step(params, lr_schedule(step, total_steps, cfg.lr_encoder, cfg.warmup_ratio),
               lr_schedule(step, total_steps, cfg.lr_bilstm, cfg.warmup_ratio));
      ++step;
    }

    EpochRecord rec;
    rec.epoch = epoch;
    rec.train_loss = loss_sum / static_cast<double>(batches);
    rec.adversarial_loss = cfg.fgm.enabled ? adv_sum / static_cast<double>(batches) : 0.0;
    rec.train_accuracy = score_inputs(predict(model, train_set), train_set).accuracy;
    const MetricsReport dev = score_inputs(predict(model, dev_set), dev_set);
    rec.dev_accuracy = dev.accuracy;
    rec.dev_macro_f1 = dev.macro_f1;
    result.history.push_back(rec);
    if (on_epoch) on_epoch(rec);

    if (dev.macro_f1 > result.best_dev.macro_f1) {
      result.best_dev = dev;
      result.best_epoch = epoch;
      result.best_params = snapshot(params);
    } else if (epoch - result.best_epoch >= cfg.early_stop_patience) {
      result.stopped_early = epoch < cfg.epochs;
      break;
    }
  }
  restore(params, result.best_params);
  return result;
}

}  // namespace tempowic
