// Copyright 2026 The ddfuse Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "ddfuse/model.hpp"

namespace ddfuse {

// Three stride-2 3x3 convolutions, a 1x1 projection to one channel, then a
// global spatial mean. The score is left unsquashed (least-squares objective).
// clang-format off
inline constexpr std::array<LayerSpec, 4> kDiscriminatorLayers{{
    {"disc.0", "Disc", 1,  16, 3, 2, Activation::leaky(kLeakySlope)},
    {"disc.1", "Disc", 16, 32, 3, 2, Activation::leaky(kLeakySlope)},
    {"disc.2", "Disc", 32, 64, 3, 2, Activation::leaky(kLeakySlope)},
    {"disc.3", "Disc", 64, 1,  1, 1, Activation::none()},
}};
// clang-format on

template <std::floating_point T>
class Discriminator {
 public:
  Discriminator() = default;
  explicit Discriminator(std::array<ConvParams<T>, kDiscriminatorLayers.size()> layers)
      : layers(std::move(layers)) {}

  Discriminator(const Discriminator&) = delete;
  Discriminator& operator=(const Discriminator&) = delete;
  Discriminator(Discriminator&&) noexcept = default;
  Discriminator& operator=(Discriminator&&) noexcept = default;

  [[nodiscard]] Discriminator clone() const {
    std::array<ConvParams<T>, kDiscriminatorLayers.size()> copy;
    for (std::size_t i = 0; i < copy.size(); ++i) copy[i] = layers[i].clone();
    return Discriminator(std::move(copy));
  }

  /// (n, 1, h, w) -> (n, 1, 1, 1) raw scores.
  BasicTensor<T> operator()(const BasicTensor<T>& x) const {
    BasicTensor<T> y = x;
    for (std::size_t i = 0; i < layers.size(); ++i) {
      y = conv2d(y, layers[i], kDiscriminatorLayers[i].activation);
    }
    return spatial_mean(y);
  }

  [[nodiscard]] std::vector<BasicTensor<T>> parameters() const {
    std::vector<BasicTensor<T>> out;
    for (const auto& l : layers) {
      out.push_back(l.weight);
      out.push_back(l.bias);
    }
    return out;
  }

  void zero_grad() {
    for (auto& l : layers) {
      l.weight.zero_grad();
      l.bias.zero_grad();
    }
  }

  std::array<ConvParams<T>, kDiscriminatorLayers.size()> layers;
};

template <std::floating_point T = float>
Discriminator<T> build_discriminator(std::uint64_t seed) {
  Rng rng(seed, 0x646973635f696e69ULL);
  return Discriminator<T>(init_layers<T>(kDiscriminatorLayers, rng));
}

}  // namespace ddfuse
