// Copyright 2026 The ddfuse Authors
// SPDX-License-Identifier: Apache-2.0
//
// The decomposition network: a shared convolutional trunk that splits a
// single-channel image into three high-frequency images and one
// quarter-resolution semantic image whose upsampling is the low-frequency
// image. Their pixel sum is the reconstruction.
//
//   f0 = Cin(x); f1 = C1(f0); f2 = C2(f1); f3 = C3(f2)
//   g_i = Detail(R_i(f_i))            Detail weights shared by all three i
//   s   = Semantic(f3 + Cres(f0))     two stride-2 layers
//   ups = upsample_nearest(s, 4)
//   re  = g1 + g2 + g3 + ups
//
// R_i reads the C_i output directly rather than an accumulated stream.
#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

#include "ddfuse/conv.hpp"
#include "ddfuse/ops.hpp"
#include "ddfuse/random.hpp"
#include "ddfuse/tensor.hpp"

namespace ddfuse {

inline constexpr double kLeakySlope = 0.2;

struct LayerSpec {
  std::string_view name;   // checkpoint key
  std::string_view block;  // block label used in diagnostics
  std::size_t in;
  std::size_t out;
  std::size_t kernel;
  std::size_t stride;
  Activation activation;
};

// clang-format off
inline constexpr std::array<LayerSpec, 18> kModelLayers{{
    {"cin.0",      "Cin",      1,  16, 3, 1, Activation::leaky(kLeakySlope)},
    {"cin.1",      "Cin",      16, 32, 3, 1, Activation::leaky(kLeakySlope)},
    {"cin.2",      "Cin",      32, 64, 3, 1, Activation::leaky(kLeakySlope)},
    {"c1",         "C1",       64, 64, 3, 1, Activation::leaky(kLeakySlope)},
    {"c2",         "C2",       64, 64, 3, 1, Activation::leaky(kLeakySlope)},
    {"c3",         "C3",       64, 64, 3, 1, Activation::leaky(kLeakySlope)},
    {"r1",         "R1",       64, 64, 1, 1, Activation::none()},
    {"r2",         "R2",       64, 64, 1, 1, Activation::none()},
    {"r3",         "R3",       64, 64, 1, 1, Activation::none()},
    {"detail.0",   "Detail",   64, 32, 3, 1, Activation::leaky(kLeakySlope)},
    {"detail.1",   "Detail",   32, 16, 3, 1, Activation::leaky(kLeakySlope)},
    {"detail.2",   "Detail",   16, 1,  3, 1, Activation::tanh()},
    {"cres.0",     "C-res",    64, 64, 3, 1, Activation::relu()},
    {"cres.1",     "C-res",    64, 64, 3, 1, Activation::relu()},
    {"cres.2",     "C-res",    64, 64, 3, 1, Activation::relu()},
    {"semantic.0", "Semantic", 64, 32, 3, 2, Activation::relu()},
    {"semantic.1", "Semantic", 32, 16, 3, 2, Activation::relu()},
    {"semantic.2", "Semantic", 16, 1,  3, 1, Activation::tanh()},
}};
// clang-format on

/// Indices into kModelLayers / DecompositionModel::layers.
namespace layer {
inline constexpr std::size_t kCin = 0;
inline constexpr std::array<std::size_t, 3> kTrunk{3, 4, 5};
inline constexpr std::array<std::size_t, 3> kReshuffle{6, 7, 8};
inline constexpr std::size_t kDetail = 9;
inline constexpr std::size_t kCres = 12;
inline constexpr std::size_t kSemantic = 15;
}  // namespace layer

/// Fan-in scaled uniform weights, zero biases, drawn in table order.
template <std::floating_point T, std::size_t N>
std::array<ConvParams<T>, N> init_layers(const std::array<LayerSpec, N>& specs, Rng& rng) {
  std::array<ConvParams<T>, N> layers;
  for (std::size_t i = 0; i < N; ++i) {
    const auto& s = specs[i];
    layers[i] = ConvParams<T>::zeros(s.in, s.out, s.kernel, s.stride);
    const double bound = std::sqrt(6.0 / static_cast<double>(s.in * s.kernel * s.kernel));
    for (T& w : layers[i].weight.mutable_data()) w = static_cast<T>(rng.uniform(-bound, bound));
  }
  return layers;
}

template <std::floating_point T>
class DecompositionModel {
 public:
  static constexpr std::size_t kUpsampleFactor = 4;

  DecompositionModel() = default;
  explicit DecompositionModel(std::array<ConvParams<T>, kModelLayers.size()> layers)
      : layers(std::move(layers)) {}

  // Parameters are shared handles; copies would alias. Use clone().
  DecompositionModel(const DecompositionModel&) = delete;
  DecompositionModel& operator=(const DecompositionModel&) = delete;
  DecompositionModel(DecompositionModel&&) noexcept = default;
  DecompositionModel& operator=(DecompositionModel&&) noexcept = default;

  [[nodiscard]] DecompositionModel clone() const {
    std::array<ConvParams<T>, kModelLayers.size()> copy;
    for (std::size_t i = 0; i < copy.size(); ++i) copy[i] = layers[i].clone();
    return DecompositionModel(std::move(copy));
  }

  [[nodiscard]] std::vector<BasicTensor<T>> parameters() const {
    std::vector<BasicTensor<T>> out;
    for (const auto& l : layers) {
      out.push_back(l.weight);
      out.push_back(l.bias);
    }
    return out;
  }

  [[nodiscard]] std::size_t parameter_count() const {
    std::size_t total = 0;
    for (const auto& l : layers) total += l.parameter_count();
    return total;
  }

  void zero_grad() {
    for (auto& l : layers) {
      l.weight.zero_grad();
      l.bias.zero_grad();
    }
  }

  [[nodiscard]] const ConvParams<T>& detail(std::size_t i) const { return layers[layer::kDetail + i]; }

  std::array<ConvParams<T>, kModelLayers.size()> layers;
};

template <std::floating_point T = float>
DecompositionModel<T> build_model(std::uint64_t seed) {
  Rng rng(seed);
  return DecompositionModel<T>(init_layers<T>(kModelLayers, rng));
}

template <std::floating_point T>
struct Decomposition {
  BasicTensor<T> g1, g2, g3;  // high-frequency images (n, 1, h, w)
  BasicTensor<T> s;           // semantic image (n, 1, h/4, w/4)
  BasicTensor<T> ups;         // low-frequency image (n, 1, h, w)
  BasicTensor<T> re;          // g1 + g2 + g3 + ups

  [[nodiscard]] const BasicTensor<T>& high(std::size_t i) const {
    return i == 0 ? g1 : (i == 1 ? g2 : g3);
  }
};

namespace detail {

template <std::floating_point T>
BasicTensor<T> apply_layer(const DecompositionModel<T>& m, std::size_t idx, const BasicTensor<T>& x) {
  return conv2d(x, m.layers[idx], kModelLayers[idx].activation);
}

template <std::floating_point T>
BasicTensor<T> apply_block(const DecompositionModel<T>& m, std::size_t first, const BasicTensor<T>& x) {
  return apply_layer(m, first + 2, apply_layer(m, first + 1, apply_layer(m, first, x)));
}

}  // namespace detail

/// Requires a single-channel batch whose height and width are multiples of 4.
template <std::floating_point T>
Decomposition<T> forward(const DecompositionModel<T>& model, const BasicTensor<T>& image,
                         bool record_gradients = false) {
  const Shape s = image.shape();
  if (s.c != 1) throw ShapeError("forward: expected a single-channel image, got " + s.str());
  const std::size_t f = DecompositionModel<T>::kUpsampleFactor;
  if (s.h == 0 || s.w == 0 || s.h % f != 0 || s.w % f != 0) {
    throw ContractError("forward: image height and width must be divisible by 4, got " +
                        std::to_string(s.h) + "x" + std::to_string(s.w));
  }
  std::optional<NoGradGuard> no_grad;
  if (!record_gradients) no_grad.emplace();

  const auto f0 = detail::apply_block(model, layer::kCin, image);
  std::array<BasicTensor<T>, 3> taps;
  BasicTensor<T> trunk = f0;
  for (std::size_t i = 0; i < 3; ++i) {
    trunk = detail::apply_layer(model, layer::kTrunk[i], trunk);
    taps[i] = trunk;
  }
  std::array<BasicTensor<T>, 3> high;
  for (std::size_t i = 0; i < 3; ++i) {
    const auto shuffled = detail::apply_layer(model, layer::kReshuffle[i], taps[i]);
    high[i] = detail::apply_block(model, layer::kDetail, shuffled);
  }
  const auto residual = detail::apply_block(model, layer::kCres, f0);
  const auto semantic_in = add(taps[2], residual);
  Decomposition<T> d;
  d.s = detail::apply_block(model, layer::kSemantic, semantic_in);
  d.ups = upsample_nearest(d.s, f);
  d.g1 = high[0];
  d.g2 = high[1];
  d.g3 = high[2];
  d.re = add(add(add(d.g1, d.g2), d.g3), d.ups);
  return d;
}

}  // namespace ddfuse
