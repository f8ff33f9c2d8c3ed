// Copyright 2026 The ddfuse Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>

namespace ddfuse {

enum class ActivationKind { kNone, kRelu, kLeakyRelu, kTanh };

struct Activation {
  ActivationKind kind = ActivationKind::kNone;
  double slope = 0.2;  // leaky_relu only

  static constexpr Activation none() { return {ActivationKind::kNone, 0.0}; }
  static constexpr Activation relu() { return {ActivationKind::kRelu, 0.0}; }
  static constexpr Activation leaky(double s = 0.2) { return {ActivationKind::kLeakyRelu, s}; }
  static constexpr Activation tanh() { return {ActivationKind::kTanh, 0.0}; }
};

namespace detail {

/// Applies `a` in place.
template <class T>
void activate_inplace(T* v, std::size_t n, Activation a) {
  const T slope = static_cast<T>(a.slope);
  switch (a.kind) {
    case ActivationKind::kRelu:
      for (std::size_t i = 0; i < n; ++i) v[i] = v[i] > T(0) ? v[i] : T(0);
      break;
    case ActivationKind::kLeakyRelu:
      // Written as max + slope * min (same values, signed zeros included) so
      // that the loop vectorizes; the conditional product does not.
      for (std::size_t i = 0; i < n; ++i) v[i] = std::max(v[i], T(0)) + slope * std::min(v[i], T(0));
      break;
    case ActivationKind::kTanh:
      for (std::size_t i = 0; i < n; ++i) v[i] = std::tanh(v[i]);
      break;
    case ActivationKind::kNone:
      break;
  }
}

/// g[i] *= a'(x[i]), expressed through the activation output y[i]. Valid for
/// all kinds because relu and leaky_relu (positive slope) keep the sign.
template <class T>
void scale_by_derivative(T* g, const T* y, std::size_t n, Activation a) {
  const T slope = static_cast<T>(a.slope);
  switch (a.kind) {
    case ActivationKind::kRelu:
      for (std::size_t i = 0; i < n; ++i) g[i] = y[i] > T(0) ? g[i] : T(0);
      break;
    case ActivationKind::kLeakyRelu:
      for (std::size_t i = 0; i < n; ++i) {
        const T factor = y[i] > T(0) ? T(1) : slope;
        g[i] = g[i] * factor;
      }
      break;
    case ActivationKind::kTanh:
      for (std::size_t i = 0; i < n; ++i) g[i] *= T(1) - y[i] * y[i];
      break;
    case ActivationKind::kNone:
      break;
  }
}

}  // namespace detail
}  // namespace ddfuse
