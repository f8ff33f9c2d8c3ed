// Copyright 2026 The ddfuse Authors
// SPDX-License-Identifier: Apache-2.0
//
// Classical decompositions: single-level orthonormal 2-D Haar DWT and
// Laplacian high-pass filtering.
#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <vector>

#include "ddfuse/tensor.hpp"

namespace ddfuse {

enum class LaplacianKernel { kG1, kG2 };

// 4-neighbour template and its 8-neighbour extension.
inline constexpr std::array<double, 9> kLaplacianG1{0, 1, 0, 1, -4, 1, 0, 1, 0};
inline constexpr std::array<double, 9> kLaplacianG2{1, 1, 1, 1, -8, 1, 1, 1, 1};

/// 3x3 zero-padded convolution of every channel with the selected template.
/// The result carries no tape history.
template <std::floating_point T>
BasicTensor<T> laplacian_filter(const BasicTensor<T>& image, LaplacianKernel kernel) {
  const Shape s = image.shape();
  if (s.c != 1) throw ShapeError("laplacian_filter: expected a single-channel image, got " + s.str());
  const auto& taps = kernel == LaplacianKernel::kG1 ? kLaplacianG1 : kLaplacianG2;
  const auto x = image.data();
  std::vector<T> out(s.numel());
  const auto h = static_cast<std::ptrdiff_t>(s.h), w = static_cast<std::ptrdiff_t>(s.w);
  for (std::size_t n = 0; n < s.n; ++n) {
    const T* src = x.data() + n * s.plane();
    T* dst = out.data() + n * s.plane();
    for (std::ptrdiff_t y = 0; y < h; ++y) {
      for (std::ptrdiff_t xx = 0; xx < w; ++xx) {
        double acc = 0.0;
        for (std::ptrdiff_t ky = 0; ky < 3; ++ky) {
          const std::ptrdiff_t yy = y + ky - 1;
          if (yy < 0 || yy >= h) continue;
          for (std::ptrdiff_t kx = 0; kx < 3; ++kx) {
            const std::ptrdiff_t sx = xx + kx - 1;
            if (sx < 0 || sx >= w) continue;
            acc += taps[static_cast<std::size_t>(ky * 3 + kx)] * static_cast<double>(src[yy * w + sx]);
          }
        }
        dst[y * w + xx] = static_cast<T>(acc);
      }
    }
  }
  return BasicTensor<T>::from_vector(s, std::move(out));
}

template <std::floating_point T>
struct DwtBands {
  BasicTensor<T> ll;  // approximation: low-pass along x and y
  BasicTensor<T> lh;  // low-pass along x, high-pass along y
  BasicTensor<T> hl;  // high-pass along x, low-pass along y
  BasicTensor<T> hh;  // high-pass along both
};

/// Separable Haar analysis with phi = (1, 1)/sqrt2 and psi = (1, -1)/sqrt2.
template <std::floating_point T>
DwtBands<T> haar_dwt2(const BasicTensor<T>& image) {
  const Shape s = image.shape();
  if (s.h % 2 != 0 || s.w % 2 != 0 || s.h == 0 || s.w == 0) {
    throw ContractError("haar_dwt2: height and width must be even, got " + std::to_string(s.h) +
                        "x" + std::to_string(s.w));
  }
  const Shape bs{s.n, s.c, s.h / 2, s.w / 2};
  const double r = 1.0 / std::sqrt(2.0);
  const auto x = image.data();
  std::vector<T> ll(bs.numel()), lh(bs.numel()), hl(bs.numel()), hh(bs.numel());
  for (std::size_t p = 0; p < s.n * s.c; ++p) {
    const T* src = x.data() + p * s.plane();
    for (std::size_t by = 0; by < bs.h; ++by) {
      for (std::size_t bx = 0; bx < bs.w; ++bx) {
        const double a = src[(2 * by) * s.w + 2 * bx];
        const double b = src[(2 * by) * s.w + 2 * bx + 1];
        const double c = src[(2 * by + 1) * s.w + 2 * bx];
        const double d = src[(2 * by + 1) * s.w + 2 * bx + 1];
        // Rows first (x direction), then columns (y direction).
        const double top_lo = (a + b) * r, top_hi = (a - b) * r;
        const double bot_lo = (c + d) * r, bot_hi = (c - d) * r;
        const std::size_t o = p * bs.plane() + by * bs.w + bx;
        ll[o] = static_cast<T>((top_lo + bot_lo) * r);
        lh[o] = static_cast<T>((top_lo - bot_lo) * r);
        hl[o] = static_cast<T>((top_hi + bot_hi) * r);
        hh[o] = static_cast<T>((top_hi - bot_hi) * r);
      }
    }
  }
  return {BasicTensor<T>::from_vector(bs, std::move(ll)), BasicTensor<T>::from_vector(bs, std::move(lh)),
          BasicTensor<T>::from_vector(bs, std::move(hl)), BasicTensor<T>::from_vector(bs, std::move(hh))};
}

/// Exact inverse of haar_dwt2.
template <std::floating_point T>
BasicTensor<T> haar_idwt2(const DwtBands<T>& bands) {
  const Shape bs = bands.ll.shape();
  if (bands.lh.shape() != bs || bands.hl.shape() != bs || bands.hh.shape() != bs) {
    throw ShapeError("haar_idwt2: band shapes differ: " + bs.str() + ", " + bands.lh.shape().str() +
                     ", " + bands.hl.shape().str() + ", " + bands.hh.shape().str());
  }
  const Shape s{bs.n, bs.c, bs.h * 2, bs.w * 2};
  const double r = 1.0 / std::sqrt(2.0);
  const auto ll = bands.ll.data();
  const auto lh = bands.lh.data();
  const auto hl = bands.hl.data();
  const auto hh = bands.hh.data();
  std::vector<T> out(s.numel());
  for (std::size_t p = 0; p < s.n * s.c; ++p) {
    T* dst = out.data() + p * s.plane();
    for (std::size_t by = 0; by < bs.h; ++by) {
      for (std::size_t bx = 0; bx < bs.w; ++bx) {
        const std::size_t i = p * bs.plane() + by * bs.w + bx;
        const double top_lo = (double(ll[i]) + lh[i]) * r, bot_lo = (double(ll[i]) - lh[i]) * r;
        const double top_hi = (double(hl[i]) + hh[i]) * r, bot_hi = (double(hl[i]) - hh[i]) * r;
        dst[(2 * by) * s.w + 2 * bx] = static_cast<T>((top_lo + top_hi) * r);
        dst[(2 * by) * s.w + 2 * bx + 1] = static_cast<T>((top_lo - top_hi) * r);
        dst[(2 * by + 1) * s.w + 2 * bx] = static_cast<T>((bot_lo + bot_hi) * r);
        dst[(2 * by + 1) * s.w + 2 * bx + 1] = static_cast<T>((bot_lo - bot_hi) * r);
      }
    }
  }
  return BasicTensor<T>::from_vector(s, std::move(out));
}

}  // namespace ddfuse
