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

#include <gtest/gtest.h>

#include <set>

#include "test_util.hpp"

namespace tempowic {
namespace {

using testing::random_vector;

ExpertBundle<double> random_bundle(Eigen::Index m, Rng& rng, bool pos = true, bool glove = true) {
  ExpertBundle<double> b;
  b.ctx = random_vector<double>(m, rng);
  if (pos) b.pos = random_vector<double>(m, rng);
  if (glove) b.glove = random_vector<double>(m, rng);
  return b;
}

// --- S-Gate ------------------------------------------------------------------------

TEST(SGate, ZeroThetaGivesOneHalf) {
  Rng rng(1);
  SGate<double> g("g.", 4, 3, rng);
  g.theta().value.setZero();
  const auto w = g.forward(random_bundle(4, rng));
  ASSERT_EQ(w.w.size(), 3);
  for (Eigen::Index i = 0; i < 3; ++i) EXPECT_EQ(w.w(i), 0.5);
}

TEST(SGate, WeightsAreSeparable) {
  Rng rng(2);
  SGate<double> g("g.", 4, 3, rng);
  fill_normal(g.theta().value, rng, 1.0);
  auto b = random_bundle(4, rng);
  const double w_ctx = g.forward(b).weight(ExpertKind::kContext);
  b.pos = random_vector<double>(4, rng);
  EXPECT_EQ(g.forward(b).weight(ExpertKind::kContext), w_ctx);
}

TEST(SGate, WeightsInOpenUnitInterval) {
  Rng rng(3);
  SGate<double> g("g.", 5, 4, rng);
  fill_normal(g.theta().value, rng, 0.5);
  for (int i = 0; i < 1000; ++i) {
    const auto w = g.forward(random_bundle(5, rng));
    for (Eigen::Index k = 0; k < w.w.size(); ++k) {
      EXPECT_GT(w.w(k), 0.0);
      EXPECT_LT(w.w(k), 1.0);
    }
  }
}

TEST(SGate, DimensionMismatchThrows) {
  Rng rng(4);
  SGate<double> g("g.", 4, 3, rng);
  auto b = random_bundle(4, rng);
  b.pos = random_vector<double>(5, rng);
  EXPECT_THROW(g.forward(b), DimensionError);
  EXPECT_THROW(g.forward(random_bundle(6, rng)), DimensionError);
}

TEST(SGate, GradientsMatchFiniteDifferences) {
  Rng rng(5);
  SGate<double> g("g.", 4, 3, rng);
  fill_normal(g.theta().value, rng, 0.7);
  fill_normal(g.task_vector().value, rng, 0.7);
  const auto b0 = random_bundle(4, rng);
  auto e_ctx = testing::input_param("ctx", b0.ctx);
  auto e_pos = testing::input_param("pos", b0.pos);
  auto e_glove = testing::input_param("glove", b0.glove);
  ParamList<double> params;
  g.collect(params);
  for (auto* p : {&e_ctx, &e_pos, &e_glove}) params.push_back(p);
  const Vector<double> c = random_vector<double>(3, rng);
  auto bundle = [&] {
    ExpertBundle<double> b;
    b.ctx = e_ctx.value.row(0).transpose();
    b.pos = e_pos.value.row(0).transpose();
    b.glove = e_glove.value.row(0).transpose();
    return b;
  };
  auto loss = [&] { return g.forward(bundle()).w.dot(c); };
  auto analytic = [&] {
    for (auto* p : params) p->zero_grad();
    typename SGate<double>::Cache cache;
    g.forward(bundle(), &cache);
    const auto d = g.backward(cache, c);
    e_ctx.grad.row(0) += d[0].transpose();
    e_pos.grad.row(0) += d[1].transpose();
    e_glove.grad.row(0) += d[2].transpose();
  };
  const auto r = testing::grad_check(params, loss, analytic, 40, 6);
  EXPECT_GE(r.checked, 20);
  EXPECT_LE(r.max_rel_error, 1e-4) << r.worst;
}

// --- J-Gate ------------------------------------------------------------------------

TEST(JGate, ZeroThetaIsUniform) {
  Rng rng(6);
  JGate<double> g("g.", 4, 3, rng);
  g.theta().value.setZero();
  const auto w = g.forward(random_bundle(4, rng));
  for (Eigen::Index i = 0; i < 3; ++i) EXPECT_NEAR(w.w(i), 1.0 / 3.0, 1e-15);
}

TEST(JGate, SimplexOverRandomDraws) {
  Rng rng(7);
  JGate<double> g("g.", 6, 3, rng);
  for (int i = 0; i < 1000; ++i) {
    fill_normal(g.theta().value, rng, 0.5);
    const auto w = g.forward(random_bundle(6, rng));
    EXPECT_LE(std::abs(w.w.sum() - 1.0), 1e-9);
    for (Eigen::Index k = 0; k < 3; ++k) {
      EXPECT_GT(w.w(k), 0.0);
      EXPECT_LT(w.w(k), 1.0);
    }
  }
}

TEST(JGate, ShiftInvariantLogits) {
  Rng rng(8);
  const Vector<double> z = random_vector<double>(3, rng);
  const Vector<double> a = softmax<double>(z);
  const Vector<double> b = softmax<double>((z.array() + 3.7).matrix());
  EXPECT_LE((a - b).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(JGate, ExpertCountMustMatch) {
  Rng rng(9);
  JGate<double> g("g.", 4, 3, rng);
  EXPECT_THROW(g.forward(random_bundle(4, rng, true, false)), DimensionError);
  JGate<double> two("g.", 4, 2, rng);
  EXPECT_EQ(two.forward(random_bundle(4, rng, true, false)).w.size(), 2);
}

TEST(JGate, GradientsMatchFiniteDifferences) {
  Rng rng(10);
  JGate<double> g("g.", 4, 3, rng);
  fill_normal(g.theta().value, rng, 0.5);
  const auto b0 = random_bundle(4, rng);
  auto e_ctx = testing::input_param("ctx", b0.ctx);
  auto e_pos = testing::input_param("pos", b0.pos);
  auto e_glove = testing::input_param("glove", b0.glove);
  ParamList<double> params;
  g.collect(params);
  for (auto* p : {&e_ctx, &e_pos, &e_glove}) params.push_back(p);
  const Vector<double> c = random_vector<double>(3, rng);
  auto bundle = [&] {
    ExpertBundle<double> b;
    b.ctx = e_ctx.value.row(0).transpose();
    b.pos = e_pos.value.row(0).transpose();
    b.glove = e_glove.value.row(0).transpose();
    return b;
  };
  auto loss = [&] { return g.forward(bundle()).w.dot(c); };
  auto analytic = [&] {
    for (auto* p : params) p->zero_grad();
    typename JGate<double>::Cache cache;
    g.forward(bundle(), &cache);
    const auto d = g.backward(cache, c);
    e_ctx.grad.row(0) += d[0].transpose();
    e_pos.grad.row(0) += d[1].transpose();
    e_glove.grad.row(0) += d[2].transpose();
  };
  const auto r = testing::grad_check(params, loss, analytic, 40, 12);
  EXPECT_GE(r.checked, 20);
  EXPECT_LE(r.max_rel_error, 1e-4) << r.worst;
}

// --- mix ---------------------------------------------------------------------------

GateWeights<double> weights(std::initializer_list<double> w) {
  GateWeights<double> g{{ExpertKind::kContext, ExpertKind::kPos, ExpertKind::kGlove}, Vector<double>(3)};
  Eigen::Index i = 0;
  for (double x : w) g.w(i++) = x;
  return g;
}

TEST(Mix, OneHotSelectsContext) {
  Rng rng(11);
  const auto b = random_bundle(5, rng);
  EXPECT_EQ(mix(b, weights({1, 0, 0})), b.ctx);
}

TEST(Mix, HandArithmetic) {
  ExpertBundle<double> b;
  b.ctx = (Vector<double>(2) << 1, 0).finished();
  b.pos = (Vector<double>(2) << 0, 1).finished();
  b.glove = (Vector<double>(2) << 0, 0).finished();
  EXPECT_EQ(mix(b, weights({0.5, 0.5, 0.5})), (Vector<double>(2) << 0.5, 0.5).finished());
}

TEST(Mix, IdenticalExpertsUnderJGateReturnThePoint) {
  Rng rng(12);
  JGate<double> g("g.", 4, 3, rng);
  fill_normal(g.theta().value, rng, 1.0);
  ExpertBundle<double> b;
  b.ctx = b.pos = b.glove = random_vector<double>(4, rng);
  EXPECT_LE((mix(b, g.forward(b)) - b.ctx).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Mix, JGateOutputInConvexHull) {
  Rng rng(13);
  JGate<double> g("g.", 5, 3, rng);
  for (int i = 0; i < 500; ++i) {
    fill_normal(g.theta().value, rng, 1.0);
    const auto b = random_bundle(5, rng);
    const Vector<double> e = mix(b, g.forward(b));
    for (Eigen::Index k = 0; k < 5; ++k) {
      const double lo = std::min({b.ctx(k), b.pos(k), b.glove(k)});
      const double hi = std::max({b.ctx(k), b.pos(k), b.glove(k)});
      EXPECT_GE(e(k), lo - 1e-12);
      EXPECT_LE(e(k), hi + 1e-12);
    }
  }
}

TEST(Mix, SGateWeightsAreNotRenormalized) {
  ExpertBundle<double> b;
  b.ctx = b.pos = b.glove = Vector<double>::Ones(2);
  EXPECT_EQ(mix(b, weights({0.5, 0.5, 0.5})), Vector<double>::Constant(2, 1.5));
}

TEST(Mix, GradientsMatchFiniteDifferences) {
  Rng rng(14);
  const auto b0 = random_bundle(4, rng);
  auto e_ctx = testing::input_param("ctx", b0.ctx);
  auto e_pos = testing::input_param("pos", b0.pos);
  auto e_glove = testing::input_param("glove", b0.glove);
  auto w = testing::input_param("w", random_vector<double>(3, rng));
  ParamList<double> params{&e_ctx, &e_pos, &e_glove, &w};
  const Vector<double> c = random_vector<double>(4, rng);
  auto bundle = [&] {
    ExpertBundle<double> b;
    b.ctx = e_ctx.value.row(0).transpose();
    b.pos = e_pos.value.row(0).transpose();
    b.glove = e_glove.value.row(0).transpose();
    return b;
  };
  auto gw = [&] {
    GateWeights<double> g{{ExpertKind::kContext, ExpertKind::kPos, ExpertKind::kGlove}, w.value.row(0).transpose()};
    return g;
  };
  auto loss = [&] {
    const Vector<double> e = mix(bundle(), gw());
    return e.dot(c) + 0.5 * e.squaredNorm();
  };
  auto analytic = [&] {
    for (auto* p : params) p->zero_grad();
    const Vector<double> e = mix(bundle(), gw());
    const auto g = mix_backward(bundle(), gw(), Vector<double>(c + e));
    e_ctx.grad.row(0) = g.d_experts[0].transpose();
    e_pos.grad.row(0) = g.d_experts[1].transpose();
    e_glove.grad.row(0) = g.d_experts[2].transpose();
    w.grad.row(0) = g.d_w.transpose();
  };
  const auto r = testing::grad_check(params, loss, analytic, 30, 15);
  EXPECT_LE(r.max_rel_error, 1e-4) << r.worst;
}

// --- gates inside the model ----------------------------------------------------------

TEST(MoeModel, TwoDistinctGatesPerModel) {
  const auto task = testing::toy_task(8, 4);
  for (GateVariant v : {GateVariant::kSeparate, GateVariant::kJoint}) {
    TempoWicModel<double> model(testing::tiny_model(static_cast<int>(task.vocab.size()), v));
    std::set<std::string> gate1, gate2;
    for (const auto* p : model.parameters()) {
      if (p->name.rfind("moe.gate1.", 0) == 0) gate1.insert(p->name.substr(10));
      if (p->name.rfind("moe.gate2.", 0) == 0) gate2.insert(p->name.substr(10));
    }
    EXPECT_FALSE(gate1.empty());
    EXPECT_EQ(gate1, gate2);
    if (v == GateVariant::kSeparate) {
      EXPECT_TRUE(gate1.count("task_vector"));
    }
    const auto [w1, w2] = model.gate_weights(task.train[0]);
    EXPECT_EQ(w1.w.size(), 3);
    EXPECT_EQ(w2.w.size(), 3);
  }
}

TEST(MoeModel, GateCoversOnlyEnabledExperts) {
  const auto task = testing::toy_task(8, 4);
  ModelConfig c = testing::tiny_model(static_cast<int>(task.vocab.size()), GateVariant::kJoint);
  c.use_glove = false;
  TempoWicModel<double> model(c);
  const auto [w1, w2] = model.gate_weights(task.train[0]);
  ASSERT_EQ(w1.kinds, (std::vector<ExpertKind>{ExpertKind::kContext, ExpertKind::kPos}));
  EXPECT_NEAR(w1.w.sum(), 1.0, 1e-12);
  c.use_pos = false;
  EXPECT_THROW(TempoWicModel<double>{c}, ConfigError);
}

TEST(GateVariant, Parse) {
  EXPECT_EQ(parse_gate_variant("none"), GateVariant::kNone);
  EXPECT_EQ(parse_gate_variant("s_gate"), GateVariant::kSeparate);
  EXPECT_EQ(parse_gate_variant("j_gate"), GateVariant::kJoint);
  EXPECT_THROW(parse_gate_variant("k_gate"), ConfigError);
}

}  // namespace
}  // namespace tempowic
