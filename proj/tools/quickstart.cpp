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

// Trains a small S-Gate model on generated data through the library API and
// reports dev metrics and the gate weights of one instance.

#include <cstdio>

#include "tempowic.hpp"

int main() {
  using namespace tempowic;

  SyntheticConfig gen;
  gen.n_instances = 512;
  const Dataset train_data = make_synthetic(gen);
  gen.seed = 1;
  gen.n_instances = 128;
  gen.id_prefix = "dev";
  const Dataset dev_data = make_synthetic(gen);

  RunConfig cfg;
  for (const char* s : {"moe.variant=s_gate", "model.d=32", "model.mlp_hidden=64", "model.bilstm_hidden=32",
                        "model.pos_dim=16", "model.glove_dim=16", "model.task_dim=16", "train.epochs=40",
                        "train.patience=10", "train.lr_encoder=1e-3", "train.lr_bilstm=1e-3"}) {
    cfg.set(s);
  }

  const ExperimentResult r = run_experiment(cfg, train_data, dev_data, [](const EpochRecord& e) {
    std::printf("epoch %2d  loss %.4f  dev macro-F1 %.4f\n", e.epoch, e.train_loss, e.dev_macro_f1);
  });
  std::printf("best epoch %d: dev accuracy %.4f, macro-F1 %.4f\n", r.train.best_epoch, r.train.best_dev.accuracy,
              r.train.best_dev.macro_f1);

  const ModelInput in = (*r.system.featurizer)(dev_data.front());
  const auto [g1, g2] = r.system.model->gate_weights(in);
  for (Eigen::Index k = 0; k < g1.w.size(); ++k) {
    std::printf("%-8s gate1 %.3f  gate2 %.3f\n", to_string(g1.kinds[static_cast<std::size_t>(k)]), g1.w(k), g2.w(k));
  }
  return 0;
}
