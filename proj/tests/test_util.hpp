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

// Shared helpers for the unit tests.

#pragma once

#include <unistd.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>

#include "tempowic.hpp"

namespace tempowic::testing {

inline std::filesystem::path fixture(const std::string& name) {
  return std::filesystem::path(TEMPOWIC_FIXTURES_DIR) / name;
}

inline std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Per-process temporary root, so parallel test processes never share a
// directory; removed when the process exits.
inline const std::filesystem::path& scratch_root() {
  struct Root {
    std::filesystem::path path =
        std::filesystem::temp_directory_path() / ("tempowic_test_" + std::to_string(::getpid()));
    ~Root() {
      std::error_code ec;
      std::filesystem::remove_all(path, ec);
    }
  };
  static const Root root;
  return root.path;
}

// An empty directory named `name` under the scratch root.
inline std::filesystem::path scratch_dir(const std::string& name) {
  auto dir = scratch_root() / name;
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

template <typename T>
Matrix<T> random_matrix(Eigen::Index r, Eigen::Index c, Rng& rng, double stddev = 1.0) {
  Matrix<T> m(r, c);
  fill_normal(m, rng, stddev);
  return m;
}

template <typename T>
Vector<T> random_vector(Eigen::Index n, Rng& rng, double stddev = 1.0) {
  Matrix<T> m = random_matrix<T>(n, 1, rng, stddev);
  return Eigen::Map<Vector<T>>(m.data(), n);
}

struct GradCheck {
  int checked = 0;
  double max_rel_error = 0.0;
  std::string worst;
};

// Compares analytic gradients with fourth-order central differences on `samples` randomly
// chosen scalar entries across `params`. `analytic` must zero and then fill
// the gradients of `loss`. Relative error is |a - n| / max(|a|, |n|, floor);
// the floor keeps entries whose true gradient is ~0 from reporting noise.
inline GradCheck grad_check(const ParamList<double>& params, const std::function<double()>& loss,
                            const std::function<void()>& analytic, int samples, std::uint64_t seed, double h = 1e-4,
                            double floor = 1e-7) {
  analytic();
  std::vector<Matrix<double>> grads;
  for (auto* p : params) grads.push_back(p->grad);
  Rng rng(seed);
  GradCheck out;
  std::vector<std::size_t> usable;
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (params[i]->size() > 0) usable.push_back(i);
  }
  for (int s = 0; s < samples; ++s) {
    const std::size_t pi = usable[rng() % usable.size()];
    auto& p = *params[pi];
    const auto k = static_cast<Eigen::Index>(rng() % static_cast<std::uint64_t>(p.size()));
    const double saved = p.value.data()[k];
    auto at = [&](double offset) {
      p.value.data()[k] = saved + offset;
      return loss();
    };
    const double numeric = (8 * (at(h) - at(-h)) - (at(2 * h) - at(-2 * h))) / (12 * h);
    p.value.data()[k] = saved;
    const double a = grads[pi].data()[k];
    const double rel = std::abs(a - numeric) / std::max({std::abs(a), std::abs(numeric), floor});
    ++out.checked;
    if (rel > out.max_rel_error) {
      out.max_rel_error = rel;
      std::ostringstream os;
      os << p.name << "[" << k << "] analytic=" << std::scientific << a << " numeric=" << numeric;
      out.worst = os.str();
    }
  }
  return out;
}

inline std::vector<Matrix<double>> snapshot_grads(const ParamList<double>& params) {
  std::vector<Matrix<double>> out;
  for (const auto* p : params) out.push_back(p->grad);
  return out;
}

// A parameter wrapping a free input vector so inputs can be checked like weights.
inline Parameter<double> input_param(const std::string& name, const Vector<double>& v) {
  Parameter<double> p(name, 1, v.size(), ParamGroup::kEncoder, false);
  p.value.row(0) = v.transpose();
  return p;
}

inline PairInstance make_instance(std::string id, std::string word, std::string text1, Span s1, std::string text2,
                                  Span s2, bool label) {
  PairInstance p;
  p.id = std::move(id);
  p.word = std::move(word);
  p.text1 = std::move(text1);
  p.span1 = s1;
  p.text2 = std::move(text2);
  p.span2 = s2;
  p.label = label;
  return p;
}

// A small model configuration that trains in seconds.
inline ModelConfig tiny_model(int vocab_size, GateVariant variant = GateVariant::kNone, std::uint64_t seed = 3) {
  ModelConfig c;
  c.vocab_size = vocab_size;
  c.d = 8;
  c.n_layers = 2;
  c.mlp_hidden = 12;
  c.variant = variant;
  c.pos_dim = 4;
  c.glove_dim = 5;
  c.bilstm_hidden = 6;
  c.task_dim = 3;
  c.seed = seed;
  return c;
}

// Synthetic data featurized for a model built on its vocabulary.
struct ToyTask {
  Vocabulary vocab;
  std::shared_ptr<WhitespaceTokenizer> tokenizer;
  std::shared_ptr<Featurizer> featurizer;
  std::vector<ModelInput> train;
  std::vector<ModelInput> dev;
};

inline ToyTask toy_task(std::size_t n_train = 64, std::size_t n_dev = 32, std::uint64_t seed = 0) {
  SyntheticConfig tc;
  tc.n_instances = n_train;
  tc.seed = seed;
  SyntheticConfig dc = tc;
  dc.n_instances = n_dev;
  dc.seed = seed + 1;
  dc.id_prefix = "dev";
  const Dataset tr = make_synthetic(tc);
  const Dataset dv = make_synthetic(dc);
  ToyTask t;
  t.vocab = Vocabulary::build(corpus_tokens(tr));
  t.tokenizer = std::make_shared<WhitespaceTokenizer>(t.vocab);
  t.featurizer = std::make_shared<Featurizer>(t.tokenizer, t.vocab, PosTagger(), 64);
  t.train = (*t.featurizer)(tr);
  t.dev = (*t.featurizer)(dv);
  return t;
}

}  // namespace tempowic::testing
