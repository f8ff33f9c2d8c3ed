// Copyright 2026 The ddfuse Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include "support.hpp"

namespace ddfuse::testing {
namespace {

Tensor row(std::vector<float> v) {
  const std::size_t n = v.size();
  return Tensor::from_vector({1, 1, 1, n}, std::move(v));
}

TEST(Elementwise, Examples) {
  EXPECT_EQ(values(add(row({1, 2}), row({3, 4}))), (std::vector<float>{4, 6}));
  EXPECT_EQ(values(scalar_mul(row({1, 2}), 0.5f)), (std::vector<float>{0.5f, 1.0f}));
  const auto x = random_tensor({2, 3, 4, 5}, 1);
  for (float v : values(sub(x, x))) EXPECT_EQ(v, 0.0f);
  EXPECT_EQ(values(mul(row({2, -3}), row({4, 5}))), (std::vector<float>{8, -15}));
  EXPECT_EQ(values(div(row({3, 1}), row({2, 4}))), (std::vector<float>{1.5f, 0.25f}));
  EXPECT_EQ(values(add_scalar(row({1, 2}), 1.5f)), (std::vector<float>{2.5f, 3.5f}));
  EXPECT_EQ(values(square(row({-3, 2}))), (std::vector<float>{9, 4}));
}

TEST(Elementwise, OperatorsForward) {
  const auto a = row({1, 2}), b = row({3, 5});
  EXPECT_EQ(values(a + b), values(add(a, b)));
  EXPECT_EQ(values(a - b), values(sub(a, b)));
  EXPECT_EQ(values(a * b), values(mul(a, b)));
  EXPECT_EQ(values(a * 2.0f), values(2.0f * a));
}

TEST(Elementwise, ShapeMismatchThrows) {
  EXPECT_THROW(add(row({1, 2}), row({1, 2, 3})), ShapeError);
  EXPECT_THROW(sub(Tensor::zeros({1, 1, 2, 2}), Tensor::zeros({1, 1, 1, 4})), ShapeError);
  EXPECT_THROW(mul(Tensor::zeros({2, 1, 2, 2}), Tensor::zeros({1, 2, 2, 2})), ShapeError);
  EXPECT_THROW(mse(row({1}), row({1, 2})), ShapeError);
}

TEST(Activation, Examples) {
  EXPECT_EQ(values(relu(row({-2.0f, 3.5f}))), (std::vector<float>{0.0f, 3.5f}));
  EXPECT_FLOAT_EQ(leaky_relu(row({-1.0f}), 0.2f).item(), -0.2f);
  EXPECT_EQ(tanh(row({0.0f})).item(), 0.0f);
  for (float v : values(tanh(random_tensor({1, 1, 8, 8}, 2, -20, 20)))) {
    EXPECT_GE(v, -1.0f);
    EXPECT_LE(v, 1.0f);
  }
}

TEST(Activation, DispatchMatchesDirectOps) {
  const auto x = random_tensor({1, 2, 4, 4}, 3);
  EXPECT_EQ(values(activate(x, Activation::relu())), values(relu(x)));
  EXPECT_EQ(values(activate(x, Activation::leaky(0.2))), values(leaky_relu(x, 0.2f)));
  EXPECT_EQ(values(activate(x, Activation::tanh())), values(tanh(x)));
  EXPECT_EQ(values(activate(x, Activation::none())), values(x));
}

TEST(Upsample, FactorOneIsIdentity) {
  const auto x = random_tensor({2, 3, 5, 7}, 4);
  EXPECT_EQ(values(upsample_nearest(x, 1)), values(x));
}

TEST(Upsample, ReplicatesBlocks) {
  const auto x = Tensor::from_vector({1, 1, 2, 2}, {1, 2, 3, 4});
  const auto y = upsample_nearest(x, 2);
  EXPECT_EQ(y.shape(), (Shape{1, 1, 4, 4}));
  EXPECT_EQ(values(y), (std::vector<float>{1, 1, 2, 2, 1, 1, 2, 2, 3, 3, 4, 4, 3, 3, 4, 4}));
  EXPECT_EQ(upsample_nearest(Tensor::zeros({1, 1, 64, 64}), 4).shape(), (Shape{1, 1, 256, 256}));
  EXPECT_THROW(upsample_nearest(x, 0), ContractError);
}

TEST(Upsample, PoolingRoundTripIsExact) {
  for (std::size_t f : {1u, 2u, 4u}) {
    const auto x = random_tensor({2, 3, 5, 6}, 5 + f);
    EXPECT_EQ(values(avg_pool(upsample_nearest(x, f), f)), values(x)) << "factor " << f;
  }
}

TEST(Upsample, GradientSumsBlocks) {
  auto x = Tensor::from_vector({1, 1, 1, 2}, {1, 2}, true);
  sum(upsample_nearest(x, 3)).backward();
  EXPECT_EQ(x.grad()[0], 9.0f);
  EXPECT_EQ(x.grad()[1], 9.0f);
}

TEST(AvgPool, MeansBlocks) {
  const auto x = Tensor::from_vector({1, 1, 2, 4}, {1, 2, 3, 4, 5, 6, 7, 8});
  EXPECT_EQ(values(avg_pool(x, 2)), (std::vector<float>{3.5f, 5.5f}));
  EXPECT_THROW(avg_pool(Tensor::zeros({1, 1, 3, 4}), 2), ContractError);
}

TEST(BoxMean, ValidWindows) {
  const auto x = Tensor::from_vector({1, 1, 3, 3}, {1, 2, 3, 4, 5, 6, 7, 8, 9});
  const auto y = box_mean(x, 2);
  EXPECT_EQ(y.shape(), (Shape{1, 1, 2, 2}));
  EXPECT_EQ(values(y), (std::vector<float>{3, 4, 6, 7}));
  EXPECT_FLOAT_EQ(box_mean(x, 3).item(), 5.0f);
  EXPECT_THROW(box_mean(x, 4), ContractError);
}

TEST(Reductions, SumMeanSpatialMean) {
  const auto x = Tensor::from_vector({2, 1, 1, 3}, {1, 2, 3, 4, 5, 6});
  EXPECT_FLOAT_EQ(sum(x).item(), 21.0f);
  EXPECT_FLOAT_EQ(mean(x).item(), 3.5f);
  const auto m = spatial_mean(x);
  EXPECT_EQ(m.shape(), (Shape{2, 1, 1, 1}));
  EXPECT_EQ(values(m), (std::vector<float>{2, 5}));
}

TEST(Mse, Examples) {
  const auto x = random_tensor({1, 2, 3, 3}, 6);
  EXPECT_EQ(mse(x, x).item(), 0.0f);
  EXPECT_FLOAT_EQ(mse(row({0, 0}), row({1, 1})).item(), 1.0f);
}

TEST(Mse, GradientOfBothArguments) {
  auto x = Tensor::from_vector({1, 1, 1, 2}, {1, 3}, true);
  auto y = Tensor::from_vector({1, 1, 1, 2}, {0, 1}, true);
  mse(x, y).backward();
  EXPECT_FLOAT_EQ(x.grad()[0], 1.0f);
  EXPECT_FLOAT_EQ(x.grad()[1], 2.0f);
  EXPECT_FLOAT_EQ(y.grad()[0], -1.0f);
  EXPECT_FLOAT_EQ(y.grad()[1], -2.0f);
}

TEST(Ops, ResultsStayFinite) {
  const auto a = random_tensor({2, 4, 8, 8}, 7);
  const auto b = random_tensor({2, 4, 8, 8}, 8, 0.5, 1.5);
  EXPECT_TRUE(all_finite(div(a, b)));
  EXPECT_TRUE(all_finite(tanh(scalar_mul(a, 100.0f))));
  EXPECT_TRUE(all_finite(box_mean(mul(a, b), 3)));
}

}  // namespace
}  // namespace ddfuse::testing
