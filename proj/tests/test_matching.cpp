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

#include "test_util.hpp"

namespace tempowic {
namespace {

using testing::random_vector;

Vector<double> vec(std::initializer_list<double> v) {
  Vector<double> out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out(i++) = x;
  return out;
}

// --- match_features ------------------------------------------------------------------

TEST(MatchFeatures, HandExample) {
  EXPECT_EQ(match_features(vec({1, 2}), vec({3, 4}), vec({5})), vec({1, 2, 3, 4, -2, -2, 3, 8, 5}));
}

TEST(MatchFeatures, IdentityCase) {
  Rng rng(1);
  const Vector<double> v = random_vector<double>(4, rng);
  const Vector<double> f = match_features(v, v, vec({0.5}));
  EXPECT_EQ(f.segment(8, 4), Vector<double>::Zero(4));
  EXPECT_EQ(f.segment(12, 4), Vector<double>(v.cwiseProduct(v)));
}

// Independent re-concatenation through std::vector.
std::vector<double> oracle_features(const Vector<double>& a, const Vector<double>& b, const Vector<double>& c,
                                    const MatchConfig& cfg) {
  std::vector<double> out(a.data(), a.data() + a.size());
  out.insert(out.end(), b.data(), b.data() + b.size());
  if (cfg.use_diff_prod) {
    for (Eigen::Index i = 0; i < a.size(); ++i) out.push_back(a[i] - b[i]);
    for (Eigen::Index i = 0; i < a.size(); ++i) out.push_back(a[i] * b[i]);
  }
  if (cfg.use_cls) out.insert(out.end(), c.data(), c.data() + c.size());
  return out;
}

TEST(MatchFeatures, MatchesOracleOnRandomVectors) {
  Rng rng(2);
  for (int trial = 0; trial < 100; ++trial) {
    const Eigen::Index m = 1 + static_cast<Eigen::Index>(rng() % 9);
    const Eigen::Index d = 1 + static_cast<Eigen::Index>(rng() % 5);
    const auto a = random_vector<double>(m, rng), b = random_vector<double>(m, rng), c = random_vector<double>(d, rng);
    for (bool cls : {false, true}) {
      for (bool dp : {false, true}) {
        const MatchConfig cfg{cls, dp};
        const Vector<double> f = match_features(a, b, c, cfg);
        EXPECT_EQ(std::vector<double>(f.data(), f.data() + f.size()), oracle_features(a, b, c, cfg));
      }
    }
  }
}

TEST(MatchFeatures, SegmentBoundaries) {
  const Eigen::Index m = 3;
  const Vector<double> f = match_features(vec({1, 1, 1}), vec({2, 2, 2}), vec({9, 9}));
  ASSERT_EQ(f.size(), 4 * m + 2);
  EXPECT_EQ(f(m - 1), 1);
  EXPECT_EQ(f(m), 2);
  EXPECT_EQ(f(2 * m), -1);
  EXPECT_EQ(f(3 * m), 2);
  EXPECT_EQ(f(4 * m), 9);
}

TEST(MatchFeatures, SwapChangesOnlyDifferenceSign) {
  Rng rng(3);
  const auto a = random_vector<double>(5, rng), b = random_vector<double>(5, rng), c = random_vector<double>(2, rng);
  const Vector<double> f = match_features(a, b, c);
  const Vector<double> g = match_features(b, a, c);
  EXPECT_EQ(f.segment(0, 5), g.segment(5, 5));
  EXPECT_EQ(f.segment(5, 5), g.segment(0, 5));
  EXPECT_EQ(f.segment(10, 5), Vector<double>(-g.segment(10, 5)));
  EXPECT_EQ(f.segment(15, 5), g.segment(15, 5));
  EXPECT_EQ(f.segment(20, 2), g.segment(20, 2));
}

TEST(MatchFeatures, AblationDropsExactSegmentSizes) {
  for (Eigen::Index m : {2, 7}) {
    for (Eigen::Index d : {1, 4}) {
      const Eigen::Index full = match_dim({true, true}, m, d);
      EXPECT_EQ(full, 4 * m + d);
      EXPECT_EQ(full - match_dim({false, true}, m, d), d);
      EXPECT_EQ(full - match_dim({true, false}, m, d), 2 * m);
      EXPECT_EQ(full - match_dim({false, false}, m, d), 2 * m + d);
    }
  }
}

TEST(MatchFeatures, DimensionMismatchThrows) {
  EXPECT_THROW(match_features(vec({1, 2}), vec({1}), vec({0})), DimensionError);
}

TEST(MatchFeatures, BackwardMatchesFiniteDifferences) {
  Rng rng(4);
  for (bool cls : {false, true}) {
    for (bool dp : {false, true}) {
      const MatchConfig cfg{cls, dp};
      auto e1 = testing::input_param("e1", random_vector<double>(4, rng));
      auto e2 = testing::input_param("e2", random_vector<double>(4, rng));
      auto ec = testing::input_param("cls", random_vector<double>(3, rng));
      const Vector<double> w = random_vector<double>(match_dim(cfg, 4, 3), rng);
      auto feats = [&] {
        return match_features<double>(e1.value.row(0).transpose(), e2.value.row(0).transpose(),
                                      ec.value.row(0).transpose(), cfg);
      };
      auto loss = [&] { return feats().dot(w); };
      auto analytic = [&] {
        const auto g =
            match_features_backward<double>(e1.value.row(0).transpose(), e2.value.row(0).transpose(), 3, w, cfg);
        e1.grad.row(0) = g.d_e1.transpose();
        e2.grad.row(0) = g.d_e2.transpose();
        ec.grad.row(0) = g.d_cls.transpose();
      };
      const auto r = testing::grad_check({&e1, &e2, &ec}, loss, analytic, 30, 5);
      EXPECT_LE(r.max_rel_error, 1e-4) << r.worst;
    }
  }
}

// --- classifier head ---------------------------------------------------------------

TEST(ClassifierHead, ZeroWeightsGiveOneHalf) {
  Rng rng(6);
  ClassifierHead<double> head(5, 4, rng);
  ParamList<double> params;
  head.collect(params);
  for (auto* p : params) p->value.setZero();
  EXPECT_EQ(head.classify(random_vector<double>(5, rng)), Vector<double>::Constant(2, 0.5));
}

TEST(ClassifierHead, ProbabilitiesOnSimplex) {
  Rng rng(7);
  ClassifierHead<double> head(6, 8, rng);
  for (int i = 0; i < 100; ++i) {
    const Vector<double> p = head.classify(random_vector<double>(6, rng, 3.0));
    EXPECT_NEAR(p.sum(), 1.0, 1e-9);
    EXPECT_GT(p.minCoeff(), 0.0);
    EXPECT_LT(p.maxCoeff(), 1.0);
  }
}

TEST(ClassifierHead, GradientsMatchFiniteDifferences) {
  Rng rng(8);
  ClassifierHead<double> head(6, 5, rng);
  ParamList<double> params;
  head.collect(params);
  for (auto* p : params) fill_normal(p->value, rng, 0.5);
  auto x = testing::input_param("features", random_vector<double>(6, rng));
  params.push_back(&x);
  auto loss = [&] { return cross_entropy_with_logits<double>(head.logits(x.value.row(0).transpose()), 1); };
  auto analytic = [&] {
    for (auto* p : params) p->zero_grad();
    typename ClassifierHead<double>::Cache cache;
    Vector<double> dz;
    cross_entropy_with_logits<double>(head.logits(x.value.row(0).transpose(), &cache), 1, &dz);
    x.grad.row(0) = head.backward(cache, dz).transpose();
  };
  const auto r = testing::grad_check(params, loss, analytic, 40, 9);
  EXPECT_GE(r.checked, 20);
  EXPECT_LE(r.max_rel_error, 1e-4) << r.worst;
}

// --- loss --------------------------------------------------------------------------

TEST(Loss, HandValues) {
  EXPECT_NEAR(cross_entropy<double>(vec({0.5, 0.5}), 1).value, std::log(2.0), 1e-15);
  EXPECT_EQ(cross_entropy<double>(vec({0.0, 1.0}), 1).value, 0.0);
  EXPECT_NEAR(cross_entropy<double>(vec({0.9, 0.1}), 1).value, -std::log(0.1), 1e-12);
  EXPECT_NEAR(cross_entropy<double>(vec({0.9, 0.1}), 1).value, 2.302585, 1e-6);
}

TEST(Loss, ZeroProbabilityIsClamped) {
  const auto l = cross_entropy<double>(vec({1.0, 0.0}), 1);
  EXPECT_TRUE(l.clamped);
  EXPECT_NEAR(l.value, -std::log(kProbabilityFloor), 1e-9);
  EXPECT_FALSE(cross_entropy<double>(vec({0.5, 0.5}), 0).clamped);
}

TEST(Loss, LogitFormAgreesWithProbabilities) {
  Rng rng(10);
  for (int i = 0; i < 50; ++i) {
    const Vector<double> z = random_vector<double>(2, rng, 4.0);
    const int label = static_cast<int>(rng() % 2);
    EXPECT_NEAR(cross_entropy_with_logits<double>(z, label), cross_entropy<double>(softmax<double>(z), label).value,
                1e-12);
    EXPECT_GE(cross_entropy_with_logits<double>(z, label), 0.0);
  }
  // Large logits stay finite.
  EXPECT_NEAR(cross_entropy_with_logits<double>(vec({1000.0, 0.0}), 1), 1000.0, 1e-9);
}

// --- full model --------------------------------------------------------------------

class FullModelGradient : public ::testing::TestWithParam<GateVariant> {};

TEST_P(FullModelGradient, MatchesFiniteDifferences) {
  const auto task = testing::toy_task(6, 2);
  TempoWicModel<double> model(testing::tiny_model(static_cast<int>(task.vocab.size()), GetParam(), 21));
  const auto params = model.parameters();
  const std::span<const ModelInput> batch(task.train.data(), 3);
  auto loss = [&] { return model.loss(batch); };
  auto analytic = [&] {
    model.zero_grad();
    model.forward_backward(batch);
  };
  const auto r = testing::grad_check(params, loss, analytic, 80, 22);
  EXPECT_GE(r.checked, 20);
  EXPECT_LE(r.max_rel_error, 1e-4) << r.worst;
}

INSTANTIATE_TEST_SUITE_P(Variants, FullModelGradient,
                         ::testing::Values(GateVariant::kNone, GateVariant::kSeparate, GateVariant::kJoint),
                         [](const auto& info) { return std::string(to_string(info.param)); });

TEST(Descent, OneSmallStepLowersLossOnFixedBatch) {
  const auto task = testing::toy_task(16, 2);
  const std::span<const ModelInput> batch(task.train.data(), 8);
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    TempoWicModel<double> model(testing::tiny_model(static_cast<int>(task.vocab.size()), GateVariant::kNone, seed));
    model.zero_grad();
    const double before = model.forward_backward(batch);
    for (auto* p : model.parameters()) p->value -= 1e-3 * p->grad;
    EXPECT_LT(model.loss(batch), before) << "seed " << seed;
  }
}

}  // namespace
}  // namespace tempowic
