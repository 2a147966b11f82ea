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

#include <string>
#include <string_view>
#include <vector>

#include "tempowic/core.hpp"

namespace tempowic {

enum class ExpertKind { kContext, kPos, kGlove };

inline const char* to_string(ExpertKind k) {
  switch (k) {
    case ExpertKind::kContext:
      return "ctx";
    case ExpertKind::kPos:
      return "pos";
    case ExpertKind::kGlove:
      return "glove";
  }
  return "?";
}

// Expert encodings of one target occurrence. Disabled experts are left empty.
template <typename T>
struct ExpertBundle {
  Vector<T> ctx;
  Vector<T> pos;
  Vector<T> glove;

  // Enabled experts in canonical order (ctx, pos, glove).
  std::vector<ExpertKind> kinds() const {
    std::vector<ExpertKind> k{ExpertKind::kContext};
    if (pos.size() > 0) k.push_back(ExpertKind::kPos);
    if (glove.size() > 0) k.push_back(ExpertKind::kGlove);
    return k;
  }

  const Vector<T>& get(ExpertKind k) const {
    switch (k) {
      case ExpertKind::kPos:
        return pos;
      case ExpertKind::kGlove:
        return glove;
      default:
        return ctx;
    }
  }

  std::vector<const Vector<T>*> members() const {
    std::vector<const Vector<T>*> out;
    for (auto k : kinds()) out.push_back(&get(k));
    return out;
  }

  void check() const {
    for (const auto* e : members()) check_dim(e->size(), ctx.size(), "expert bundle member");
  }
};

template <typename T>
struct GateWeights {
  std::vector<ExpertKind> kinds;
  Vector<T> w;

  T weight(ExpertKind k) const {
    for (std::size_t i = 0; i < kinds.size(); ++i) {
      if (kinds[i] == k) return w(static_cast<Eigen::Index>(i));
    }
    return T(0);
  }
};

enum class GateVariant { kNone, kSeparate, kJoint };

inline GateVariant parse_gate_variant(std::string_view s) {
  if (s == "none") return GateVariant::kNone;
  if (s == "s_gate") return GateVariant::kSeparate;
  if (s == "j_gate") return GateVariant::kJoint;
  throw ConfigError("unknown moe.variant '" + std::string(s) + "' (expected none, s_gate or j_gate)");
}

inline const char* to_string(GateVariant v) {
  switch (v) {
    case GateVariant::kNone:
      return "none";
    case GateVariant::kSeparate:
      return "s_gate";
    case GateVariant::kJoint:
      return "j_gate";
  }
  return "?";
}

// Separate gate: w_i = sigmoid(theta . [V_t ; e_i]) for each expert i, with
// one shared theta and a trainable task vector V_t.
template <typename T>
class SGate {
 public:
  struct Cache {
    std::vector<Vector<T>> inputs;
    Vector<T> w;
  };

  SGate() = default;
  SGate(const std::string& prefix, int expert_dim, int task_dim, Rng& rng)
      : m_(expert_dim),
        v_(task_dim),
        theta_(prefix + "theta", 1, task_dim + expert_dim, ParamGroup::kExpert, true),
        task_(prefix + "task_vector", 1, task_dim, ParamGroup::kExpert, false) {
    fill_normal(theta_.value, rng, 0.02);
    fill_normal(task_.value, rng, 0.02);
  }

  Parameter<T>& theta() { return theta_; }
  Parameter<T>& task_vector() { return task_; }

  void collect(ParamList<T>& out) {
    out.push_back(&theta_);
    out.push_back(&task_);
  }

  GateWeights<T> forward(const ExpertBundle<T>& bundle, Cache* cache = nullptr) const {
    bundle.check();
    check_dim(bundle.ctx.size(), m_, "s_gate expert");
    GateWeights<T> out{bundle.kinds(), Vector<T>(static_cast<Eigen::Index>(bundle.kinds().size()))};
    const T task_term = theta_.value.row(0).head(v_).dot(task_.value.row(0));
    if (cache) cache->inputs.clear();
    for (std::size_t i = 0; i < out.kinds.size(); ++i) {
      const Vector<T>& e = bundle.get(out.kinds[i]);
      out.w(static_cast<Eigen::Index>(i)) = sigmoid(task_term + theta_.value.row(0).tail(m_).dot(e.transpose()));
      if (cache) cache->inputs.push_back(e);
    }
    if (cache) cache->w = out.w;
    return out;
  }

  // Accumulates parameter gradients; returns d(loss)/d(expert i) per expert.
  std::vector<Vector<T>> backward(const Cache& cache, const Vector<T>& d_w) {
    std::vector<Vector<T>> d_inputs;
    for (std::size_t i = 0; i < cache.inputs.size(); ++i) {
      const T w = cache.w(static_cast<Eigen::Index>(i));
      const T dz = d_w(static_cast<Eigen::Index>(i)) * w * (T(1) - w);
      theta_.grad.row(0).head(v_) += dz * task_.value.row(0);
      theta_.grad.row(0).tail(m_) += dz * cache.inputs[i].transpose();
      task_.grad.row(0) += dz * theta_.value.row(0).head(v_);
      d_inputs.push_back(dz * theta_.value.row(0).tail(m_).transpose());
    }
    return d_inputs;
  }

 private:
  Eigen::Index m_ = 0;
  Eigen::Index v_ = 0;
  Parameter<T> theta_;
  Parameter<T> task_;
};

// Joint gate: W = softmax(theta [e_1; ...; e_k]) over the k enabled experts.
template <typename T>
class JGate {
 public:
  struct Cache {
    Vector<T> input;
    Vector<T> w;
  };

  JGate() = default;
  JGate(const std::string& prefix, int expert_dim, int n_experts, Rng& rng)
      : m_(expert_dim),
        k_(n_experts),
        theta_(prefix + "theta", n_experts, n_experts * expert_dim, ParamGroup::kExpert, true) {
    fill_normal(theta_.value, rng, 0.02);
  }

  Parameter<T>& theta() { return theta_; }

  void collect(ParamList<T>& out) { out.push_back(&theta_); }

  Vector<T> logits(const ExpertBundle<T>& bundle) const { return theta_.value * stacked(bundle); }

  GateWeights<T> forward(const ExpertBundle<T>& bundle, Cache* cache = nullptr) const {
    const Vector<T> x = stacked(bundle);
    GateWeights<T> out{bundle.kinds(), softmax<T>(theta_.value * x)};
    if (cache) {
      cache->input = x;
      cache->w = out.w;
    }
    return out;
  }

  std::vector<Vector<T>> backward(const Cache& cache, const Vector<T>& d_w) {
    const Vector<T> dz = (cache.w.array() * (d_w.array() - d_w.dot(cache.w))).matrix();
    theta_.grad.noalias() += dz * cache.input.transpose();
    const Vector<T> dx = theta_.value.transpose() * dz;
    std::vector<Vector<T>> d_inputs;
    for (Eigen::Index i = 0; i < k_; ++i) d_inputs.push_back(dx.segment(i * m_, m_));
    return d_inputs;
  }

 private:
  Vector<T> stacked(const ExpertBundle<T>& bundle) const {
    bundle.check();
    const auto members = bundle.members();
    check_dim(static_cast<Eigen::Index>(members.size()), k_, "j_gate expert count");
    check_dim(bundle.ctx.size(), m_, "j_gate expert");
    Vector<T> x(k_ * m_);
    for (Eigen::Index i = 0; i < k_; ++i) x.segment(i * m_, m_) = *members[static_cast<std::size_t>(i)];
    return x;
  }

  Eigen::Index m_ = 0;
  Eigen::Index k_ = 0;
  Parameter<T> theta_;
};

// E' = sum_i w_i e_i over the enabled experts. Weights are used as given (no
// renormalization of S-Gate outputs).
template <typename T>
Vector<T> mix(const ExpertBundle<T>& bundle, const GateWeights<T>& weights) {
  bundle.check();
  const auto members = bundle.members();
  check_dim(weights.w.size(), static_cast<Eigen::Index>(members.size()), "mix weights");
  Vector<T> out = Vector<T>::Zero(bundle.ctx.size());
  for (std::size_t i = 0; i < members.size(); ++i) out += weights.w(static_cast<Eigen::Index>(i)) * *members[i];
  return out;
}

// Gradients of mix: d(weights) and d(expert i).
template <typename T>
struct MixGrad {
  Vector<T> d_w;
  std::vector<Vector<T>> d_experts;
};

template <typename T>
MixGrad<T> mix_backward(const ExpertBundle<T>& bundle, const GateWeights<T>& weights, const Vector<T>& d_out) {
  const auto members = bundle.members();
  MixGrad<T> g;
  g.d_w.resize(static_cast<Eigen::Index>(members.size()));
  for (std::size_t i = 0; i < members.size(); ++i) {
    g.d_w(static_cast<Eigen::Index>(i)) = d_out.dot(*members[i]);
    g.d_experts.push_back(weights.w(static_cast<Eigen::Index>(i)) * d_out);
  }
  return g;
}

// A gate of either variant behind one interface.
template <typename T>
class Gate {
 public:
  struct Cache {
    typename SGate<T>::Cache s;
    typename JGate<T>::Cache j;
  };

  Gate() = default;
  Gate(GateVariant variant, const std::string& prefix, int expert_dim, int n_experts, int task_dim, Rng& rng)
      : variant_(variant) {
    if (variant == GateVariant::kSeparate) s_ = SGate<T>(prefix, expert_dim, task_dim, rng);
    if (variant == GateVariant::kJoint) j_ = JGate<T>(prefix, expert_dim, n_experts, rng);
  }

  GateVariant variant() const { return variant_; }

  void collect(ParamList<T>& out) {
    if (variant_ == GateVariant::kSeparate) s_.collect(out);
    if (variant_ == GateVariant::kJoint) j_.collect(out);
  }

  GateWeights<T> forward(const ExpertBundle<T>& bundle, Cache* cache = nullptr) const {
    if (variant_ == GateVariant::kSeparate) return s_.forward(bundle, cache ? &cache->s : nullptr);
    if (variant_ == GateVariant::kJoint) return j_.forward(bundle, cache ? &cache->j : nullptr);
    throw ConfigError("gate forward called with moe.variant=none");
  }

  std::vector<Vector<T>> backward(const Cache& cache, const Vector<T>& d_w) {
    if (variant_ == GateVariant::kSeparate) return s_.backward(cache.s, d_w);
    return j_.backward(cache.j, d_w);
  }

 private:
  GateVariant variant_ = GateVariant::kNone;
  SGate<T> s_;
  JGate<T> j_;
};

}  // namespace tempowic
