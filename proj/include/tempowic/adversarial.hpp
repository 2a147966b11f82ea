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
#include <cstring>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "tempowic/core.hpp"

namespace tempowic {

enum class NormScope { kGlobal, kPerRow };

inline NormScope parse_norm_scope(std::string_view s) {
  if (s == "global") return NormScope::kGlobal;
  if (s == "per_row") return NormScope::kPerRow;
  throw ConfigError("unknown fgm.norm_scope '" + std::string(s) + "' (expected global or per_row)");
}

inline const char* to_string(NormScope s) { return s == NormScope::kGlobal ? "global" : "per_row"; }

struct FgmConfig {
  bool enabled = true;
  double epsilon = 1.0;
  NormScope norm_scope = NormScope::kGlobal;
  bool perturb_experts = false;  // also perturb the POS / word-vector expert tables
};

// Gradients with L2 norm below this produce no perturbation.
inline constexpr double kMinGradNorm = 1e-12;

// delta = epsilon * g / ||g||_2, over the whole tensor or row by row.
template <typename T>
Matrix<T> fgm_perturbation(const Matrix<T>& grad, double epsilon, NormScope scope = NormScope::kGlobal) {
  if (epsilon < 0.0) throw ConfigError("fgm.epsilon must be non-negative");
  Matrix<T> delta = Matrix<T>::Zero(grad.rows(), grad.cols());
  if (epsilon == 0.0) return delta;
  if (scope == NormScope::kGlobal) {
    const double norm = static_cast<double>(grad.norm());
    if (!std::isfinite(norm)) throw NumericError("fgm: non-finite gradient");
    if (norm < kMinGradNorm) return delta;
    delta = grad * static_cast<T>(epsilon / norm);
    return delta;
  }
  for (Eigen::Index r = 0; r < grad.rows(); ++r) {
    const double norm = static_cast<double>(grad.row(r).norm());
    if (!std::isfinite(norm)) throw NumericError("fgm: non-finite gradient");
    if (norm < kMinGradNorm) continue;
    delta.row(r) = grad.row(r) * static_cast<T>(epsilon / norm);
  }
  return delta;
}

template <typename T>
struct FgmStepResult {
  T adversarial_loss = T(0);
  std::vector<double> perturbation_norms;  // one per perturbed table
};

// Adversarial half of an FGM training step. Expects the clean forward/backward
// to have populated gradients. Perturbs each target table along its own
// gradient, runs a second forward/backward, adds the clean gradients back on
// top, and restores the tables bit-exactly.
template <typename Model, typename Batch>
auto fgm_step(Model& model, const Batch& batch, const FgmConfig& cfg) {
  using T = typename std::remove_reference_t<decltype(*model.parameters().front())>::Scalar;
  FgmStepResult<T> result;
  auto targets = model.adversarial_targets(cfg.perturb_experts);
  std::vector<Matrix<T>> backups;
  backups.reserve(targets.size());
  for (auto* p : targets) {
    backups.push_back(p->value);
    const Matrix<T> delta = fgm_perturbation(p->grad, cfg.epsilon, cfg.norm_scope);
    result.perturbation_norms.push_back(static_cast<double>(delta.norm()));
    p->value += delta;
  }

  auto params = model.parameters();
  std::vector<Matrix<T>> clean_grads;
  clean_grads.reserve(params.size());
  for (auto* p : params) {
    clean_grads.push_back(p->grad);
    p->zero_grad();
  }
  result.adversarial_loss = model.forward_backward(std::span(batch));
  for (std::size_t i = 0; i < params.size(); ++i) params[i]->grad = clean_grads[i] + params[i]->grad;

  for (std::size_t i = 0; i < targets.size(); ++i) {
    targets[i]->value = backups[i];
    if (std::memcmp(targets[i]->value.data(), backups[i].data(),
                    static_cast<std::size_t>(backups[i].size()) * sizeof(T)) != 0) {
      throw NumericError("fgm: restore of " + targets[i]->name + " failed");
    }
  }
  return result;
}

}  // namespace tempowic
