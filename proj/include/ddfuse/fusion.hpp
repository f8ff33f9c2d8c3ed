// Copyright 2026 The ddfuse Authors
// SPDX-License-Identifier: Apache-2.0
//
// Pixel-wise fusion of two decompositions. Corresponding high-frequency
// images are combined with max or add, the low-frequency images with avg or
// max, and the fused bands are summed in the same order as a reconstruction.
#pragma once

#include <algorithm>
#include <array>
#include <optional>
#include <string>
#include <string_view>

#include "ddfuse/model.hpp"

namespace ddfuse {

enum class HighRule { kMax, kAdd };
enum class LowRule { kAvg, kMax };

struct FusionStrategy {
  HighRule high = HighRule::kMax;
  LowRule low = LowRule::kAvg;

  friend bool operator==(const FusionStrategy&, const FusionStrategy&) = default;

  [[nodiscard]] std::string name() const {
    return std::string(high == HighRule::kMax ? "max" : "add") + "+" + (low == LowRule::kAvg ? "avg" : "max");
  }
};

inline constexpr std::array<FusionStrategy, 4> kAllStrategies{{
    {HighRule::kMax, LowRule::kAvg},
    {HighRule::kMax, LowRule::kMax},
    {HighRule::kAdd, LowRule::kAvg},
    {HighRule::kAdd, LowRule::kMax},
}};

inline std::optional<HighRule> parse_high_rule(std::string_view s) {
  if (s == "max") return HighRule::kMax;
  if (s == "add") return HighRule::kAdd;
  return std::nullopt;
}

inline std::optional<LowRule> parse_low_rule(std::string_view s) {
  if (s == "avg") return LowRule::kAvg;
  if (s == "max") return LowRule::kMax;
  return std::nullopt;
}

namespace detail {

template <std::floating_point T, class F>
BasicTensor<T> combine(const BasicTensor<T>& a, const BasicTensor<T>& b, const char* op, F f) {
  require_same_shape(a, b, op);
  const auto av = a.data();
  const auto bv = b.data();
  std::vector<T> out(av.size());
  for (std::size_t i = 0; i < av.size(); ++i) out[i] = f(av[i], bv[i]);
  return BasicTensor<T>::from_vector(a.shape(), std::move(out));
}

}  // namespace detail

template <std::floating_point T>
BasicTensor<T> fuse_high(const BasicTensor<T>& a, const BasicTensor<T>& b, HighRule rule) {
  if (rule == HighRule::kMax) return detail::combine(a, b, "fuse_high", [](T x, T y) { return std::max(x, y); });
  return detail::combine(a, b, "fuse_high", [](T x, T y) { return x + y; });
}

template <std::floating_point T>
BasicTensor<T> fuse_low(const BasicTensor<T>& a, const BasicTensor<T>& b, LowRule rule) {
  if (rule == LowRule::kMax) return detail::combine(a, b, "fuse_low", [](T x, T y) { return std::max(x, y); });
  return detail::combine(a, b, "fuse_low", [](T x, T y) { return (x + y) / T(2); });
}

template <std::floating_point T>
struct FusedFeatures {
  BasicTensor<T> g1, g2, g3;
  BasicTensor<T> ups;
  BasicTensor<T> fused;  // g1 + g2 + g3 + ups
};

/// Fuses two already computed decompositions.
template <std::floating_point T>
FusedFeatures<T> fuse_decompositions(const Decomposition<T>& vi, const Decomposition<T>& ir, FusionStrategy s) {
  NoGradGuard no_grad;
  FusedFeatures<T> f;
  f.g1 = fuse_high(vi.g1, ir.g1, s.high);
  f.g2 = fuse_high(vi.g2, ir.g2, s.high);
  f.g3 = fuse_high(vi.g3, ir.g3, s.high);
  f.ups = fuse_low(vi.ups, ir.ups, s.low);
  f.fused = add(add(add(f.g1, f.g2), f.g3), f.ups);
  return f;
}

/// Decomposes both sources and returns the unclamped fused image.
template <std::floating_point T>
BasicTensor<T> fuse_images(const DecompositionModel<T>& model, const BasicTensor<T>& ir,
                           const BasicTensor<T>& vi, FusionStrategy strategy) {
  detail::require_same_shape(ir, vi, "fuse_images");
  const auto dir = forward(model, ir, false);
  const auto dvi = forward(model, vi, false);
  return fuse_decompositions(dvi, dir, strategy).fused;
}

}  // namespace ddfuse
