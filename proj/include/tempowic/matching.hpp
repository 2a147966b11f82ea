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
#include <string>

#include "tempowic/core.hpp"

namespace tempowic {

// Which segments of [E1; E2; E1-E2; E1*E2; E_CLS] are present.
struct MatchConfig {
  bool use_cls = true;
  bool use_diff_prod = true;
};

inline Eigen::Index match_dim(const MatchConfig& cfg, Eigen::Index m, Eigen::Index d) {
  return (cfg.use_diff_prod ? 4 * m : 2 * m) + (cfg.use_cls ? d : 0);
}

template <typename T>
Vector<T> match_features(const Vector<T>& e1, const Vector<T>& e2, const Vector<T>& e_cls,
                         const MatchConfig& cfg = {}) {
  check_dim(e2.size(), e1.size(), "match_features E2");
  const Eigen::Index m = e1.size();
  Vector<T> f(match_dim(cfg, m, e_cls.size()));
  Eigen::Index at = 0;
  f.segment(at, m) = e1;
  at += m;
  f.segment(at, m) = e2;
  at += m;
  if (cfg.use_diff_prod) {
    f.segment(at, m) = e1 - e2;
    at += m;
    f.segment(at, m) = e1.cwiseProduct(e2);
    at += m;
  }
  if (cfg.use_cls) f.segment(at, e_cls.size()) = e_cls;
  return f;
}

template <typename T>
struct MatchGrad {
  Vector<T> d_e1;
  Vector<T> d_e2;
  Vector<T> d_cls;
};

template <typename T>
MatchGrad<T> match_features_backward(const Vector<T>& e1, const Vector<T>& e2, Eigen::Index cls_dim,
                                     const Vector<T>& d_f, const MatchConfig& cfg = {}) {
  const Eigen::Index m = e1.size();
  MatchGrad<T> g;
  g.d_e1 = d_f.segment(0, m);
  g.d_e2 = d_f.segment(m, m);
  Eigen::Index at = 2 * m;
  if (cfg.use_diff_prod) {
    const Vector<T> d_diff = d_f.segment(at, m);
    const Vector<T> d_prod = d_f.segment(at + m, m);
    g.d_e1 += d_diff + d_prod.cwiseProduct(e2);
    g.d_e2 += -d_diff + d_prod.cwiseProduct(e1);
    at += 2 * m;
  }
  g.d_cls = cfg.use_cls ? Vector<T>(d_f.segment(at, cls_dim)) : Vector<T>(Vector<T>::Zero(cls_dim));
  return g;
}

// Two affine layers with tanh in between; two output logits (False, True).
template <typename T>
class ClassifierHead {
 public:
  struct Cache {
    Vector<T> input;
    Vector<T> hidden;  // tanh output
    Vector<T> logits;
  };

  ClassifierHead() = default;
  ClassifierHead(int input_dim, int hidden, Rng& rng)
      : w1_("head.fc1.weight", hidden, input_dim, ParamGroup::kEncoder, true),
        b1_("head.fc1.bias", 1, hidden, ParamGroup::kEncoder, false),
        w2_("head.fc2.weight", 2, hidden, ParamGroup::kEncoder, true),
        b2_("head.fc2.bias", 1, 2, ParamGroup::kEncoder, false) {
    if (input_dim <= 0 || hidden <= 0) throw ConfigError("classifier head dimensions must be positive");
    fill_normal(w1_.value, rng, 1.0 / std::sqrt(static_cast<double>(input_dim)));
    fill_normal(w2_.value, rng, 1.0 / std::sqrt(static_cast<double>(hidden)));
  }

  Eigen::Index input_dim() const { return w1_.value.cols(); }

  void collect(ParamList<T>& out) {
    out.push_back(&w1_);
    out.push_back(&b1_);
    out.push_back(&w2_);
    out.push_back(&b2_);
  }

  Vector<T> logits(const Vector<T>& features, Cache* cache = nullptr) const {
    check_dim(features.size(), input_dim(), "classifier input");
    Vector<T> h = (w1_.value * features + b1_.value.row(0).transpose()).array().tanh().matrix();
    Vector<T> z = w2_.value * h + b2_.value.row(0).transpose();
    if (cache) {
      cache->input = features;
      cache->hidden = h;
      cache->logits = z;
    }
    return z;
  }

  // y_o = softmax(MLP(features))
  Vector<T> classify(const Vector<T>& features) const { return softmax<T>(logits(features)); }

  Vector<T> backward(const Cache& cache, const Vector<T>& d_logits) {
    w2_.grad.noalias() += d_logits * cache.hidden.transpose();
    b2_.grad.row(0) += d_logits.transpose();
    const Vector<T> d_pre =
        ((w2_.value.transpose() * d_logits).array() * (T(1) - cache.hidden.array().square())).matrix();
    w1_.grad.noalias() += d_pre * cache.input.transpose();
    b1_.grad.row(0) += d_pre.transpose();
    return w1_.value.transpose() * d_pre;
  }

 private:
  Parameter<T> w1_, b1_, w2_, b2_;
};

// Cross-entropy from logits via log-sum-exp. Returns the loss and writes
// d(loss)/d(logits) = softmax - onehot.
template <typename T>
T cross_entropy_with_logits(const Vector<T>& logits, int label, Vector<T>* d_logits = nullptr) {
  const T loss = log_sum_exp(logits) - logits(label);
  if (d_logits) {
    *d_logits = softmax<T>(logits);
    (*d_logits)(label) -= T(1);
  }
  return loss;
}

inline constexpr double kProbabilityFloor = 1e-12;

struct ProbLoss {
  double value = 0.0;
  bool clamped = false;  // true when y_o[label] fell below the floor
};

// -log y_o[label] on already-normalized probabilities.
template <typename T>
ProbLoss cross_entropy(const Vector<T>& probs, int label, double floor = kProbabilityFloor) {
  double p = static_cast<double>(probs(label));
  ProbLoss out;
  if (p < floor) {
    p = floor;
    out.clamped = true;
  }
  out.value = -std::log(p);
  return out;
}

}  // namespace tempowic
