// Copyright 2026 The ddfuse Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <set>
#include <string>

#include "oracles.hpp"
#include "support.hpp"

namespace ddfuse::testing {
namespace {

TEST(Model, ParameterCountMatchesShapeWalk) {
  const auto m = build_model(1);
  EXPECT_EQ(oracle::decomposition_parameter_count(), 303810u);
  EXPECT_EQ(m.parameter_count(), oracle::decomposition_parameter_count());
  std::size_t total = 0;
  for (const auto& p : m.parameters()) total += p.numel();
  EXPECT_EQ(total, 303810u);
}

TEST(Model, LayerTableChannelChain) {
  const auto m = build_model(1);
  for (std::size_t i = 0; i < kModelLayers.size(); ++i) {
    const auto& spec = kModelLayers[i];
    const auto& l = m.layers[i];
    EXPECT_EQ(l.weight.shape(), (Shape{spec.out, spec.in, spec.kernel, spec.kernel})) << spec.name;
    EXPECT_EQ(l.stride, spec.stride) << spec.name;
  }
  EXPECT_EQ(kModelLayers[layer::kSemantic].stride, 2u);
  EXPECT_EQ(kModelLayers[layer::kSemantic + 1].stride, 2u);
  EXPECT_EQ(kModelLayers[layer::kSemantic + 2].stride, 1u);
  std::set<std::string> names;
  for (const auto& s : kModelLayers) names.emplace(s.name);
  EXPECT_EQ(names.size(), 18u);
}

TEST(Model, SameSeedIsBitIdentical) {
  const auto a = build_model(42), b = build_model(42), c = build_model(43);
  const auto pa = a.parameters(), pb = b.parameters(), pc = c.parameters();
  ASSERT_EQ(pa.size(), 36u);
  bool any_difference = false;
  for (std::size_t i = 0; i < pa.size(); ++i) {
    EXPECT_EQ(values(pa[i]), values(pb[i]));
    any_difference = any_difference || values(pa[i]) != values(pc[i]);
  }
  EXPECT_TRUE(any_difference);
}

TEST(Model, ParametersAreDistinctLeaves) {
  const auto m = build_model(1);
  const auto params = m.parameters();
  for (std::size_t i = 0; i < params.size(); ++i) {
    EXPECT_TRUE(params[i].requires_grad());
    EXPECT_TRUE(params[i].is_leaf());
    for (std::size_t j = i + 1; j < params.size(); ++j) EXPECT_FALSE(params[i].same_node(params[j]));
  }
}

TEST(Model, CloneIsIndependent) {
  const auto m = build_model(3);
  auto c = m.clone();
  c.layers[0].weight.mutable_data()[0] += 1.0f;
  EXPECT_NE(c.layers[0].weight.data()[0], m.layers[0].weight.data()[0]);
  EXPECT_EQ(values(c.layers[1].weight), values(m.layers[1].weight));
}

class ForwardShapes : public ::testing::TestWithParam<std::size_t> {};

TEST_P(ForwardShapes, FollowLayerTableSizes) {
  const std::size_t n = GetParam();
  const auto m = build_model(5);
  const auto d = forward(m, Tensor::from_vector({1, 1, n, n}, random_image(n, n, 6).pixels));
  const Shape full{1, 1, n, n};
  EXPECT_EQ(d.g1.shape(), full);
  EXPECT_EQ(d.g2.shape(), full);
  EXPECT_EQ(d.g3.shape(), full);
  EXPECT_EQ(d.ups.shape(), full);
  EXPECT_EQ(d.re.shape(), full);
  EXPECT_EQ(d.s.shape(), (Shape{1, 1, n / 4, n / 4}));
}

INSTANTIATE_TEST_SUITE_P(Sizes, ForwardShapes, ::testing::Values(64, 128, 256));

TEST(Forward, NonSquareBatch) {
  const auto m = build_model(5);
  const auto d = forward(m, random_tensor({2, 1, 32, 48}, 7, 0, 1));
  EXPECT_EQ(d.re.shape(), (Shape{2, 1, 32, 48}));
  EXPECT_EQ(d.s.shape(), (Shape{2, 1, 8, 12}));
}

TEST(Forward, ReconstructionIsExactSum) {
  const auto m = build_model(8);
  const auto d = forward(m, random_tensor({2, 1, 64, 64}, 9, 0, 1));
  for (std::size_t i = 0; i < d.re.numel(); ++i) {
    const float sum = ((d.g1.data()[i] + d.g2.data()[i]) + d.g3.data()[i]) + d.ups.data()[i];
    ASSERT_EQ(d.re.data()[i], sum) << "element " << i;
  }
}

TEST(Forward, OutputsAreInsideOpenUnitInterval) {
  const auto m = build_model(10);
  const auto d = forward(m, random_tensor({1, 1, 64, 64}, 11, 0, 1));
  for (const auto* t : {&d.g1, &d.g2, &d.g3, &d.s, &d.ups}) {
    for (float v : t->data()) {
      ASSERT_GT(v, -1.0f);
      ASSERT_LT(v, 1.0f);
    }
  }
}

TEST(Forward, SaturatedHeadsStayWithinClosedInterval) {
  // float tanh rounds to exactly +-1 once the pre-activation passes about 9.
  auto m = build_model(10);
  for (auto* l : {&m.layers[layer::kDetail + 2], &m.layers[layer::kSemantic + 2]}) {
    l->bias.mutable_data()[0] = 3.0f;
  }
  const auto d = forward(m, random_tensor({1, 1, 64, 64}, 11, 0, 1));
  for (const auto* t : {&d.g1, &d.g2, &d.g3, &d.s, &d.ups}) {
    for (float v : t->data()) {
      ASSERT_GE(v, -1.0f);
      ASSERT_LE(v, 1.0f);
    }
  }
}

TEST(Forward, UpsampledSemanticMatchesS) {
  const auto m = build_model(12);
  const auto d = forward(m, random_tensor({1, 1, 32, 32}, 13, 0, 1));
  for (std::size_t y = 0; y < 32; ++y) {
    for (std::size_t x = 0; x < 32; ++x) ASSERT_EQ(d.ups.at(0, 0, y, x), d.s.at(0, 0, y / 4, x / 4));
  }
}

TEST(Forward, RejectsSizesNotDivisibleByFour) {
  const auto m = build_model(1);
  try {
    (void)forward(m, Tensor::zeros({1, 1, 66, 64}));
    FAIL() << "expected ContractError";
  } catch (const ContractError& e) {
    EXPECT_NE(std::string(e.what()).find("divisible by 4"), std::string::npos);
  }
  EXPECT_THROW((void)forward(m, Tensor::zeros({1, 1, 64, 62})), ContractError);
  EXPECT_THROW((void)forward(m, Tensor::zeros({1, 2, 64, 64})), ShapeError);
}

TEST(Forward, RecordsGradientsOnlyOnRequest) {
  const auto m = build_model(1);
  const auto x = random_tensor({1, 1, 16, 16}, 2, 0, 1);
  EXPECT_FALSE(forward(m, x).re.requires_grad());
  EXPECT_TRUE(forward(m, x, true).re.requires_grad());
}

TEST(Forward, DetailWeightsAreSharedByAllBranches) {
  // With one Detail parameter set, the gradient of g1 + g2 + g3 is the sum
  // of the per-branch gradients, and every branch reaches the same tensors.
  auto m = build_model<double>(14);
  const auto x = random_tensor<double>({1, 1, 16, 16}, 15, 0, 1);
  std::array<std::vector<double>, 3> per_branch;
  for (std::size_t b = 0; b < 3; ++b) {
    m.zero_grad();
    sum(forward(m, x, true).high(b)).backward();
    const auto& w = m.detail(0).weight;
    ASSERT_TRUE(w.has_grad()) << "branch " << b;
    per_branch[b].assign(w.grad().begin(), w.grad().end());
  }
  m.zero_grad();
  const auto d = forward(m, x, true);
  sum(add(add(d.g1, d.g2), d.g3)).backward();
  const auto& w = m.detail(0).weight;
  for (std::size_t i = 0; i < w.numel(); ++i) {
    ASSERT_NEAR(w.grad()[i], per_branch[0][i] + per_branch[1][i] + per_branch[2][i], 1e-10);
  }
  EXPECT_NE(per_branch[0], per_branch[1]);
  EXPECT_TRUE(m.detail(0).weight.same_node(m.layers[layer::kDetail].weight));
}

TEST(Forward, WeightsStaySharedAfterAnUpdate) {
  auto m = build_model(16);
  const auto before = values(m.detail(0).weight);
  auto params = m.parameters();
  AdamState<float> state(params);
  const auto x = random_tensor({1, 1, 16, 16}, 17, 0, 1);
  sum(forward(m, x, true).g3).backward();
  adam_step<float>(params, state, 1e-2);
  EXPECT_NE(values(m.detail(0).weight), before);
  EXPECT_EQ(m.parameters().size(), params.size());
  EXPECT_EQ(m.parameter_count(), 303810u);
  for (std::size_t i = 0; i < 3; ++i) EXPECT_TRUE(m.detail(i).weight.same_node(m.layers[layer::kDetail + i].weight));
}

TEST(Forward, TranslationCovariance) {
  const auto m = build_model(18);
  const std::size_t n = 64, shift = 4;
  const auto big = random_image(n + shift, n + shift, 19);
  auto crop = [&](std::size_t oy, std::size_t ox) {
    std::vector<float> v;
    for (std::size_t y = 0; y < n; ++y) {
      for (std::size_t x = 0; x < n; ++x) v.push_back(big.at(y + oy, x + ox));
    }
    return Tensor::from_vector({1, 1, n, n}, std::move(v));
  };
  const auto a = forward(m, crop(0, 0));
  for (const auto& [dy, dx] : {std::pair<std::size_t, std::size_t>{0, shift}, {shift, 0}, {shift, shift}}) {
    const auto b = forward(m, crop(dy, dx));
    // b(y, x) sees the content of a(y + dy, x + dx). Borders see zero padding.
    const std::size_t margin = 12;
    for (std::size_t i = 0; i < 3; ++i) {
      for (std::size_t y = margin; y + dy + margin < n; ++y) {
        for (std::size_t x = margin; x + dx + margin < n; ++x) {
          ASSERT_NEAR(b.high(i).at(0, 0, y, x), a.high(i).at(0, 0, y + dy, x + dx), 1e-5);
        }
      }
    }
    const std::size_t sm = 5, sdy = dy / 4, sdx = dx / 4, sn = n / 4;
    for (std::size_t y = sm; y + sdy + sm < sn; ++y) {
      for (std::size_t x = sm; x + sdx + sm < sn; ++x) {
        ASSERT_NEAR(b.s.at(0, 0, y, x), a.s.at(0, 0, y + sdy, x + sdx), 1e-5);
      }
    }
  }
}

}  // namespace
}  // namespace ddfuse::testing
