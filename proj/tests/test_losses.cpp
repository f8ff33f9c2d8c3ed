// Copyright 2026 The ddfuse Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <cmath>

#include "oracles.hpp"
#include "support.hpp"

namespace ddfuse::testing {
namespace {

constexpr std::array<double, 9> kG2{1, 1, 1, 1, -8, 1, 1, 1, 1};

TEST(LaplacianTarget, ConstantImageGivesZeroInterior) {
  const auto t = laplacian_target(Tensor::full({1, 1, 6, 6}, 0.7f));
  for (std::size_t y = 1; y < 5; ++y) {
    for (std::size_t x = 1; x < 5; ++x) EXPECT_NEAR(t.at(0, 0, y, x), 0.0f, 1e-6f);
  }
  EXPECT_FALSE(t.requires_grad());
}

TEST(LaplacianTarget, ImpulseResponse) {
  auto img = Tensor::zeros({1, 1, 5, 5});
  img.mutable_data()[2 * 5 + 2] = 1.0f;
  const auto t = laplacian_target(img);
  for (std::size_t y = 0; y < 5; ++y) {
    for (std::size_t x = 0; x < 5; ++x) {
      const bool centre = y == 2 && x == 2;
      const bool ring = !centre && y >= 1 && y <= 3 && x >= 1 && x <= 3;
      EXPECT_EQ(t.at(0, 0, y, x), centre ? -8.0f : (ring ? 1.0f : 0.0f)) << y << "," << x;
    }
  }
}

TEST(LaplacianTarget, RampHasZeroInterior) {
  std::vector<float> v;
  for (std::size_t y = 0; y < 8; ++y) {
    for (std::size_t x = 0; x < 8; ++x) v.push_back(static_cast<float>(x) / 8.0f);
  }
  const auto t = laplacian_target(Tensor::from_vector({1, 1, 8, 8}, v));
  for (std::size_t y = 1; y < 7; ++y) {
    for (std::size_t x = 1; x < 7; ++x) EXPECT_EQ(t.at(0, 0, y, x), 0.0f);
  }
  EXPECT_NE(t.at(0, 0, 0, 3), 0.0f);
}

TEST(LaplacianTarget, SumsToZeroForInteriorSupport) {
  // The kernel sums to zero, so an image that vanishes on its border ring has
  // a Laplacian whose total is zero.
  auto img = Tensor::zeros({1, 1, 12, 12});
  const auto r = random_image(12, 12, 3);
  for (std::size_t y = 1; y < 11; ++y) {
    for (std::size_t x = 1; x < 11; ++x) img.mutable_data()[y * 12 + x] = r.at(y, x);
  }
  double total = 0.0;
  for (float v : values(laplacian_target(img))) total += v;
  EXPECT_NEAR(total, 0.0, 1e-5);
}

TEST(LaplacianTarget, MatchesStencilOracle) {
  const auto r = random_image(13, 9, 4);
  const auto t = laplacian_target(Tensor::from_vector({1, 1, 9, 13}, r.pixels));
  const auto ref = oracle::stencil3({r.pixels.begin(), r.pixels.end()}, 9, 13, kG2);
  for (std::size_t i = 0; i < ref.size(); ++i) EXPECT_NEAR(t.data()[i], ref[i], 1e-6);
}

Decomposition<float> uniform_decomposition(Shape s, float g) {
  Decomposition<float> d;
  d.g1 = Tensor::full(s, g);
  d.g2 = Tensor::full(s, g);
  d.g3 = Tensor::full(s, g);
  return d;
}

TEST(DetailLoss, Examples) {
  const Shape s{1, 1, 4, 4};
  EXPECT_EQ(detail_loss(uniform_decomposition(s, 0.3f), Tensor::full(s, 0.3f)).item(), 0.0f);
  EXPECT_FLOAT_EQ(detail_loss(uniform_decomposition(s, 1.0f), Tensor::zeros(s)).item(), 3.0f);
  EXPECT_THROW(detail_loss(uniform_decomposition(s, 1.0f), Tensor::zeros({1, 1, 4, 8})), ShapeError);
}

TEST(DetailLoss, MatchesLoopOracle) {
  const Shape s{2, 1, 8, 8};
  Decomposition<float> d;
  d.g1 = random_tensor(s, 5);
  d.g2 = random_tensor(s, 6);
  d.g3 = random_tensor(s, 7);
  const auto target = random_tensor(s, 8, -4, 4);
  double ref = 0.0;
  for (const auto* g : {&d.g1, &d.g2, &d.g3}) {
    double acc = 0.0;
    for (std::size_t i = 0; i < s.numel(); ++i) {
      const double e = static_cast<double>(target.data()[i]) - g->data()[i];
      acc += e * e;
    }
    ref += acc / static_cast<double>(s.numel());
  }
  EXPECT_NEAR(detail_loss(d, target).item(), ref, 1e-6 * std::max(1.0, ref));
}

TEST(Ssim, IdenticalImagesGiveOne) {
  const auto x = random_tensor<double>({1, 1, 16, 16}, 9, 0, 1);
  EXPECT_NEAR(ssim(x, x).item(), 1.0, 1e-12);
}

TEST(Ssim, Symmetric) {
  const auto x = random_tensor({2, 1, 12, 10}, 10, 0, 1);
  const auto y = random_tensor({2, 1, 12, 10}, 11, 0, 1);
  EXPECT_EQ(ssim(x, y).item(), ssim(y, x).item());
}

TEST(Ssim, ConstantZeroAgainstConstantOne) {
  const double c1 = 1e-4;
  const auto v = ssim(TensorD::zeros({1, 1, 8, 8}), TensorD::full({1, 1, 8, 8}, 1.0)).item();
  EXPECT_NEAR(v, c1 / (1.0 + c1), 1e-15);
  const auto w = ssim(TensorD::zeros({1, 1, 11, 9}), TensorD::full({1, 1, 11, 9}, 1.0)).item();
  EXPECT_NEAR(w, c1 / (1.0 + c1), 1e-15);
}

TEST(Ssim, MatchesLoopOracle) {
  for (std::uint64_t seed = 0; seed < 4; ++seed) {
    const std::size_t h = 8 + 3 * seed, w = 20 - 2 * seed;
    const auto x = random_tensor<double>({1, 1, h, w}, 12 + seed, -0.5, 1.5);
    const auto y = random_tensor<double>({1, 1, h, w}, 40 + seed, -0.5, 1.5);
    EXPECT_NEAR(ssim(x, y).item(), oracle::ssim(values(x), values(y), h, w), 1e-9);
  }
}

TEST(Ssim, SmallerThanWindowThrows) {
  EXPECT_THROW(ssim(Tensor::zeros({1, 1, 7, 16}), Tensor::zeros({1, 1, 7, 16})), ContractError);
  EXPECT_THROW(ssim(Tensor::zeros({1, 1, 8, 8}), Tensor::zeros({1, 1, 8, 9})), ShapeError);
}

TEST(ReconstructionLoss, EqualImagesGiveZero) {
  const auto x = random_tensor<double>({1, 1, 16, 16}, 13, 0, 1);
  const auto r = reconstruction_loss(x, x);
  EXPECT_EQ(r.pixel.item(), 0.0);
  EXPECT_NEAR(r.ssim.item(), 0.0, 1e-12);
}

TEST(ReconstructionLoss, SsimTermWithinRange) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto a = random_tensor({1, 1, 16, 16}, 100 + seed, -1, 2);
    const auto b = scalar_mul(random_tensor({1, 1, 16, 16}, 200 + seed, -1, 2), seed % 2 == 0 ? 1.0f : -1.0f);
    const auto r = reconstruction_loss(a, b);
    EXPECT_GE(r.ssim.item(), 0.0f);
    EXPECT_LE(r.ssim.item(), 2.0f);
    EXPECT_GE(r.pixel.item(), 0.0f);
  }
}

TEST(ReconstructionLoss, MatchesLoopOracle) {
  const auto re = random_tensor<double>({1, 1, 16, 16}, 14, 0, 1);
  const auto ori = random_tensor<double>({1, 1, 16, 16}, 15, 0, 1);
  const auto r = reconstruction_loss(re, ori);
  double pix = 0.0;
  for (std::size_t i = 0; i < re.numel(); ++i) pix += std::pow(ori.data()[i] - re.data()[i], 2);
  EXPECT_NEAR(r.pixel.item(), pix / 256.0, 1e-12);
  EXPECT_NEAR(r.ssim.item(), 1.0 - oracle::ssim(values(ori), values(re), 16, 16), 1e-9);
}

TEST(DownsampleReference, Examples) {
  const auto c = downsample_reference(Tensor::full({1, 1, 8, 8}, 0.25f));
  EXPECT_EQ(c.shape(), (Shape{1, 1, 2, 2}));
  for (float v : values(c)) EXPECT_EQ(v, 0.25f);

  std::vector<float> v(16);
  for (std::size_t i = 0; i < 16; ++i) v[i] = static_cast<float>(i);
  EXPECT_FLOAT_EQ(downsample_reference(Tensor::from_vector({1, 1, 4, 4}, v)).item(), 7.5f);

  EXPECT_EQ(downsample_reference(Tensor::zeros({1, 1, 256, 256})).shape(), (Shape{1, 1, 64, 64}));
  EXPECT_THROW(downsample_reference(Tensor::zeros({1, 1, 6, 8})), ContractError);
}

TEST(DownsampleReference, BlockMeansOfRandomImage) {
  const auto x = random_tensor<double>({2, 1, 8, 12}, 16);
  const auto d = downsample_reference(x);
  for (std::size_t b = 0; b < 2; ++b) {
    for (std::size_t y = 0; y < 2; ++y) {
      for (std::size_t xx = 0; xx < 3; ++xx) {
        double acc = 0.0;
        for (std::size_t i = 0; i < 4; ++i) {
          for (std::size_t j = 0; j < 4; ++j) acc += x.at(b, 0, 4 * y + i, 4 * xx + j);
        }
        EXPECT_NEAR(d.at(b, 0, y, xx), acc / 16.0, 1e-15);
      }
    }
  }
}

struct ConstantCritic {
  float value;
  Tensor operator()(const Tensor& x) const { return Tensor::full({x.shape().n, 1, 1, 1}, value); }
};

struct MeanCritic {
  Tensor operator()(const Tensor& x) const { return spatial_mean(x); }
};

TEST(AdversarialLosses, StubCritics) {
  const auto i_s = Tensor::zeros({3, 1, 4, 4});
  const auto i_down = Tensor::full({3, 1, 4, 4}, 1.0f);

  auto r = adversarial_losses(ConstantCritic{1.0f}, i_s, i_down);
  EXPECT_FLOAT_EQ(r.generator.item(), 0.0f);
  EXPECT_FLOAT_EQ(r.discriminator.item(), 1.0f);

  r = adversarial_losses(ConstantCritic{0.5f}, i_s, i_down);
  EXPECT_FLOAT_EQ(r.generator.item(), 0.25f);
  EXPECT_FLOAT_EQ(r.discriminator.item(), 0.5f);

  r = adversarial_losses(MeanCritic{}, i_s, i_down);
  EXPECT_FLOAT_EQ(r.generator.item(), 1.0f);
  EXPECT_FLOAT_EQ(r.discriminator.item(), 0.0f);

  EXPECT_THROW(adversarial_losses(MeanCritic{}, i_s, Tensor::zeros({3, 1, 4, 8})), ShapeError);
}

TEST(AdversarialLosses, CriticScoresOnePerItem) {
  const auto d = build_discriminator(1);
  const auto y = d(random_tensor({3, 1, 64, 64}, 17, 0, 1));
  EXPECT_EQ(y.shape(), (Shape{3, 1, 1, 1}));
}

TEST(TotalLoss, WeightedSum) {
  const auto one = Tensor::scalar(1.0f), zero = Tensor::scalar(0.0f);
  EXPECT_FLOAT_EQ(total_generator_loss<float>({one, one, one, one}, LossWeights{}).item(), 111.1f);
  EXPECT_EQ(total_generator_loss<float>({zero, zero, zero, zero}, LossWeights{}).item(), 0.0f);
  const auto pix = Tensor::scalar(0.37f);
  EXPECT_FLOAT_EQ(total_generator_loss<float>({one, one, pix, one}, LossWeights{0.0, 1.0, 0.0}).item(), 1.37f);
}

TEST(TotalLoss, DetailOnlyWhenOtherWeightsZero) {
  const auto d = Tensor::scalar(2.5f);
  const auto one = Tensor::scalar(1.0f);
  EXPECT_FLOAT_EQ(total_generator_loss<float>({d, one, one, one}, LossWeights{0.0, 0.0, 0.0}).item(), 2.5f);
}

TEST(GradientIsolation, CriticLossDoesNotReachGenerator) {
  auto model = build_model(18);
  const auto disc = build_discriminator(19);
  const auto x = random_tensor({1, 1, 32, 32}, 20, 0, 1);
  const auto d = forward(model, x, true);
  discriminator_loss(disc, d.s, downsample_reference(x)).backward();
  for (const auto& p : model.parameters()) EXPECT_FALSE(p.has_grad());
  EXPECT_TRUE(disc.parameters().front().has_grad());
}

TEST(GradientIsolation, GeneratorStepLeavesCriticUntouched) {
  auto model = build_model(21);
  auto disc = build_discriminator(22);
  const auto before = disc.parameters();
  std::vector<std::vector<float>> snapshot;
  for (const auto& p : before) snapshot.push_back(values(p));

  const auto x = random_tensor({1, 1, 32, 32}, 23, 0, 1);
  const auto d = forward(model, x, true);
  const auto rec = reconstruction_loss(d.re, x);
  const auto total = total_generator_loss<float>(
      {detail_loss(d, laplacian_target(x)), generator_adversarial_loss(disc, d.s), rec.pixel, rec.ssim}, {});
  total.backward();
  auto gen = model.parameters();
  AdamState<float> state(gen);
  adam_step<float>(gen, state, 1e-3);
  const auto after = disc.parameters();
  for (std::size_t i = 0; i < after.size(); ++i) EXPECT_EQ(values(after[i]), snapshot[i]);

  // And a critic step leaves the generator alone.
  std::vector<std::vector<float>> gen_snapshot;
  for (const auto& p : gen) gen_snapshot.push_back(values(p));
  disc.zero_grad();
  discriminator_loss(disc, forward(model, x).s, downsample_reference(x)).backward();
  auto dp = disc.parameters();
  AdamState<float> dstate(dp);
  adam_step<float>(dp, dstate, 1e-3);
  for (std::size_t i = 0; i < gen.size(); ++i) EXPECT_EQ(values(gen[i]), gen_snapshot[i]);
}

TEST(Losses, EngineMatchesLoopOracleOnSmallInputs) {
  // Every generator loss component on random 8x8 data, float engine against
  // double loops.
  const std::size_t n = 8;
  const auto ori = random_image(n, n, 24);
  Decomposition<float> d;
  d.g1 = random_tensor({1, 1, n, n}, 25);
  d.g2 = random_tensor({1, 1, n, n}, 26);
  d.g3 = random_tensor({1, 1, n, n}, 27);
  d.ups = random_tensor({1, 1, n, n}, 28);
  d.re = add(add(add(d.g1, d.g2), d.g3), d.ups);
  const auto x = Tensor::from_vector({1, 1, n, n}, ori.pixels);

  const std::vector<double> o(ori.pixels.begin(), ori.pixels.end());
  const auto lap = oracle::stencil3(o, n, n, kG2);
  double detail = 0.0;
  for (const auto* g : {&d.g1, &d.g2, &d.g3}) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n * n; ++i) acc += std::pow(lap[i] - g->data()[i], 2);
    detail += acc / static_cast<double>(n * n);
  }
  std::vector<double> re(n * n);
  double pix = 0.0;
  for (std::size_t i = 0; i < n * n; ++i) {
    re[i] = static_cast<double>(d.g1.data()[i]) + d.g2.data()[i] + d.g3.data()[i] + d.ups.data()[i];
    pix += std::pow(o[i] - re[i], 2);
  }
  pix /= static_cast<double>(n * n);
  const double ss = 1.0 - oracle::ssim(o, re, n, n);

  auto rel = [](double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-6); };
  EXPECT_LT(rel(detail_loss(d, laplacian_target(x)).item(), detail), 1e-5);
  const auto r = reconstruction_loss(d.re, x);
  EXPECT_LT(rel(r.pixel.item(), pix), 1e-5);
  EXPECT_LT(rel(r.ssim.item(), ss), 1e-5);
}

}  // namespace
}  // namespace ddfuse::testing
