// Copyright 2026 The ddfuse Authors
// SPDX-License-Identifier: Apache-2.0
//
// 2-D convolution (k in {1, 3}, stride in {1, 2}, zero padding (k-1)/2).
//
// Backward (and the forward of strided or 1x1 layers) lowers to GEMM over
// banded im2col buffers: a band of output rows is unfolded into a
// (ci*k*k) x (rows*ow) matrix so that the working set stays cache sized.
// The forward of 3x3 stride-1 layers with at least 16 input and 16 output
// channels uses Winograd F(4x4, 3x3).
#pragma once

#include <Eigen/Core>

#include <algorithm>
#include <cstddef>
#include <cstring>
#include <string>
#include <vector>

#include "ddfuse/activation.hpp"
#include "ddfuse/tensor.hpp"

namespace ddfuse {

template <std::floating_point T>
struct ConvParams {
  BasicTensor<T> weight;  // (out, in, k, k)
  BasicTensor<T> bias;    // (out, 1, 1, 1)
  std::size_t stride = 1;
  std::size_t padding = 0;

  [[nodiscard]] std::size_t out_channels() const { return weight.shape().n; }
  [[nodiscard]] std::size_t in_channels() const { return weight.shape().c; }
  [[nodiscard]] std::size_t kernel() const { return weight.shape().h; }

  /// Zero-initialized parameters that participate in the gradient tape.
  static ConvParams zeros(std::size_t in, std::size_t out, std::size_t k, std::size_t stride = 1) {
    if (k != 1 && k != 3) throw ContractError("ConvParams: kernel size must be 1 or 3");
    if (stride != 1 && stride != 2) throw ContractError("ConvParams: stride must be 1 or 2");
    ConvParams p;
    p.weight = BasicTensor<T>::zeros({out, in, k, k}, true);
    p.bias = BasicTensor<T>::zeros({out, 1, 1, 1}, true);
    p.stride = stride;
    p.padding = (k - 1) / 2;
    return p;
  }

  [[nodiscard]] ConvParams clone() const {
    return ConvParams{weight.clone(), bias.clone(), stride, padding};
  }

  [[nodiscard]] std::size_t parameter_count() const { return weight.numel() + bias.numel(); }
};

namespace detail {

template <class T>
using RowMatrix = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <class T>
using ConstMatMap = Eigen::Map<const RowMatrix<T>, Eigen::Unaligned, Eigen::OuterStride<>>;
template <class T>
using MatMap = Eigen::Map<RowMatrix<T>, Eigen::Unaligned, Eigen::OuterStride<>>;

struct ConvGeometry {
  std::size_t ci, h, w;
  std::size_t co, k, stride, pad;
  std::size_t oh, ow;

  [[nodiscard]] std::size_t patch() const { return ci * k * k; }
  [[nodiscard]] bool pointwise() const { return k == 1 && stride == 1 && pad == 0; }
  // Thin layers gain nothing from the transforms; GEMM also keeps a one-hot
  // 1 -> 1 kernel exact.
  [[nodiscard]] bool winograd() const { return k == 3 && stride == 1 && pad == 1 && std::min(ci, co) >= 16; }

  /// Output rows per band, targeting roughly two million unfolded elements.
  [[nodiscard]] std::size_t band_rows() const {
    constexpr std::size_t kTarget = std::size_t{1} << 17;
    const std::size_t per_row = patch() * ow;
    return std::clamp<std::size_t>(kTarget / std::max<std::size_t>(per_row, 1), 1, oh);
  }

  /// Output columns [lo, hi) whose input column ox*stride + kx - pad is in range.
  void valid_columns(std::size_t kx, std::size_t& lo, std::size_t& hi) const {
    const auto s = static_cast<std::ptrdiff_t>(stride);
    const auto off = static_cast<std::ptrdiff_t>(kx) - static_cast<std::ptrdiff_t>(pad);
    std::ptrdiff_t first = 0;
    while (first * s + off < 0) ++first;
    std::ptrdiff_t last = static_cast<std::ptrdiff_t>(ow);
    while (last > first && (last - 1) * s + off >= static_cast<std::ptrdiff_t>(w)) --last;
    lo = static_cast<std::size_t>(first);
    hi = static_cast<std::size_t>(std::max(first, last));
  }
};

/// Unfolds output rows [y0, y0 + rows) of one image into col (patch x rows*ow).
template <class T>
void im2col(const T* img, const ConvGeometry& g, std::size_t y0, std::size_t rows, T* col) {
  const std::size_t n = rows * g.ow;
  for (std::size_t c = 0; c < g.ci; ++c) {
    for (std::size_t ky = 0; ky < g.k; ++ky) {
      for (std::size_t kx = 0; kx < g.k; ++kx) {
        T* dst = col + ((c * g.k + ky) * g.k + kx) * n;
        std::size_t lo = 0, hi = 0;
        g.valid_columns(kx, lo, hi);
        for (std::size_t r = 0; r < rows; ++r) {
          T* d = dst + r * g.ow;
          const auto iy = static_cast<std::ptrdiff_t>((y0 + r) * g.stride + ky) -
                          static_cast<std::ptrdiff_t>(g.pad);
          if (iy < 0 || iy >= static_cast<std::ptrdiff_t>(g.h) || lo >= hi) {
            std::fill(d, d + g.ow, T(0));
            continue;
          }
          const T* s = img + (c * g.h + static_cast<std::size_t>(iy)) * g.w;
          std::fill(d, d + lo, T(0));
          if (g.stride == 1) {
            std::memcpy(d + lo, s + lo + kx - g.pad, (hi - lo) * sizeof(T));
          } else {
            for (std::size_t ox = lo; ox < hi; ++ox) d[ox] = s[ox * g.stride + kx - g.pad];
          }
          std::fill(d + hi, d + g.ow, T(0));
        }
      }
    }
  }
}

/// Adjoint of im2col: scatters col back into img with accumulation.
template <class T>
void col2im_add(const T* col, const ConvGeometry& g, std::size_t y0, std::size_t rows, T* img) {
  const std::size_t n = rows * g.ow;
  for (std::size_t c = 0; c < g.ci; ++c) {
    for (std::size_t ky = 0; ky < g.k; ++ky) {
      for (std::size_t kx = 0; kx < g.k; ++kx) {
        const T* src = col + ((c * g.k + ky) * g.k + kx) * n;
        std::size_t lo = 0, hi = 0;
        g.valid_columns(kx, lo, hi);
        for (std::size_t r = 0; r < rows; ++r) {
          const auto iy = static_cast<std::ptrdiff_t>((y0 + r) * g.stride + ky) -
                          static_cast<std::ptrdiff_t>(g.pad);
          if (iy < 0 || iy >= static_cast<std::ptrdiff_t>(g.h)) continue;
          const T* s = src + r * g.ow;
          T* d = img + (c * g.h + static_cast<std::size_t>(iy)) * g.w;
          for (std::size_t ox = lo; ox < hi; ++ox) d[ox * g.stride + kx - g.pad] += s[ox];
        }
      }
    }
  }
}

/// De-interleaves a padded row of length 4 * pl into four phases of length pl.
template <class T>
void winograd_split_phases(const T* __restrict row, T* __restrict p, std::size_t pl) {
  for (std::size_t x = 0; x < pl; ++x) {
    p[x] = row[4 * x];
    p[pl + x] = row[4 * x + 1];
    p[2 * pl + x] = row[4 * x + 2];
    p[3 * pl + x] = row[4 * x + 3];
  }
}

/// Vertical input transform: B^T applied across six rows of length len.
template <class T>
void winograd_input_columns(const T* d, T* t, std::size_t len) {
  const T* __restrict d0 = d;
  const T* __restrict d1 = d + len;
  const T* __restrict d2 = d + 2 * len;
  const T* __restrict d3 = d + 3 * len;
  const T* __restrict d4 = d + 4 * len;
  const T* __restrict d5 = d + 5 * len;
  T* __restrict t0 = t;
  T* __restrict t1 = t + len;
  T* __restrict t2 = t + 2 * len;
  T* __restrict t3 = t + 3 * len;
  T* __restrict t4 = t + 4 * len;
  T* __restrict t5 = t + 5 * len;
  for (std::size_t x = 0; x < len; ++x) {
    t0[x] = T(4) * d0[x] - T(5) * d2[x] + d4[x];
    t1[x] = -T(4) * (d1[x] + d2[x]) + d3[x] + d4[x];
    t2[x] = T(4) * (d1[x] - d2[x]) - d3[x] + d4[x];
    t3[x] = T(2) * (d3[x] - d1[x]) - d2[x] + d4[x];
    t4[x] = T(2) * (d1[x] - d3[x]) - d2[x] + d4[x];
    t5[x] = T(4) * d1[x] - T(5) * d3[x] + d5[x];
  }
}

/// Horizontal input transform of one row: from the column phases p0..p3 of
/// a padded row to the six planes v + j * plane (tile index contiguous).
template <class T>
void winograd_input_row(const T* __restrict p0, const T* __restrict p1, const T* __restrict p2,
                        const T* __restrict p3, T* v, std::size_t plane, std::size_t tw) {
  T* __restrict v0 = v;
  T* __restrict v1 = v + plane;
  T* __restrict v2 = v + 2 * plane;
  T* __restrict v3 = v + 3 * plane;
  T* __restrict v4 = v + 4 * plane;
  T* __restrict v5 = v + 5 * plane;
  for (std::size_t tx = 0; tx < tw; ++tx) {
    const T a0 = p0[tx], a1 = p1[tx], a2 = p2[tx], a3 = p3[tx];
    const T a4 = p0[tx + 1], a5 = p1[tx + 1];
    v0[tx] = T(4) * a0 - T(5) * a2 + a4;
    v1[tx] = -T(4) * (a1 + a2) + a3 + a4;
    v2[tx] = T(4) * (a1 - a2) - a3 + a4;
    v3[tx] = T(2) * (a3 - a1) - a2 + a4;
    v4[tx] = T(2) * (a1 - a3) - a2 + a4;
    v5[tx] = T(4) * a1 - T(5) * a3 + a5;
  }
}

/// Output transform of one tile row: m + k * plane holds transformed plane k
/// for tw tiles. Writes four output rows of length 4 * tw into y, plus bias.
template <class T>
void winograd_output_rows(const T* m, std::size_t plane, std::size_t tw, T bias, T* __restrict s,
                          T* __restrict y) {
  // s[(4 * j + i) * tw + tx]: row i of A^T M for column j.
  for (std::size_t j = 0; j < 6; ++j) {
    const T* __restrict m0 = m + j * plane;
    const T* __restrict m1 = m + (6 + j) * plane;
    const T* __restrict m2 = m + (12 + j) * plane;
    const T* __restrict m3 = m + (18 + j) * plane;
    const T* __restrict m4 = m + (24 + j) * plane;
    const T* __restrict m5 = m + (30 + j) * plane;
    T* __restrict s0 = s + (4 * j) * tw;
    T* __restrict s1 = s0 + tw;
    T* __restrict s2 = s1 + tw;
    T* __restrict s3 = s2 + tw;
    for (std::size_t tx = 0; tx < tw; ++tx) {
      const T a = m1[tx] + m2[tx], b = m1[tx] - m2[tx];
      const T c = m3[tx] + m4[tx], d = m3[tx] - m4[tx];
      s0[tx] = m0[tx] + a + c;
      s1[tx] = b + T(2) * d;
      s2[tx] = a + T(4) * c;
      s3[tx] = b + T(8) * d + m5[tx];
    }
  }
  for (std::size_t i = 0; i < 4; ++i) {
    const T* __restrict q0 = s + (0 * 4 + i) * tw;
    const T* __restrict q1 = s + (1 * 4 + i) * tw;
    const T* __restrict q2 = s + (2 * 4 + i) * tw;
    const T* __restrict q3 = s + (3 * 4 + i) * tw;
    const T* __restrict q4 = s + (4 * 4 + i) * tw;
    const T* __restrict q5 = s + (5 * 4 + i) * tw;
    T* __restrict yi = y + i * 4 * tw;
    for (std::size_t tx = 0; tx < tw; ++tx) {
      const T a = q1[tx] + q2[tx], b = q1[tx] - q2[tx];
      const T c = q3[tx] + q4[tx], d = q3[tx] - q4[tx];
      yi[4 * tx] = q0[tx] + a + c + bias;
      yi[4 * tx + 1] = b + T(2) * d + bias;
      yi[4 * tx + 2] = a + T(4) * c + bias;
      yi[4 * tx + 3] = b + T(8) * d + q5[tx] + bias;
    }
  }
}

/// Winograd F(4x4, 3x3) for 3x3 kernels with stride 1 and padding 1, with
/// the bias and activation applied to each finished output row. Bands of
/// tile rows keep the transformed buffers cache sized; each of the 36
/// transformed planes is one GEMM.
template <class T>
void winograd_forward(const T* in, std::size_t batch, const ConvGeometry& g, const T* weight,
                      const T* bias, Activation act, T* out) {
  const std::size_t ci = g.ci, co = g.co, h = g.h, w = g.w;
  const std::size_t th = (h + 3) / 4, tw = (w + 3) / 4;

  // U[k] = (G f G^T)[k / 6][k % 6] as a (co x ci) matrix.
  std::vector<T> u(36 * co * ci);
  auto g_rows = [](const T* f, std::size_t stride, T* r) {
    const T a = f[0], b = f[stride], c = f[2 * stride];
    r[0] = a / T(4);
    r[1] = -(a + b + c) / T(6);
    r[2] = -(a - b + c) / T(6);
    r[3] = a / T(24) + b / T(12) + c / T(6);
    r[4] = a / T(24) - b / T(12) + c / T(6);
    r[5] = c;
  };
  for (std::size_t o = 0; o < co; ++o) {
    for (std::size_t c = 0; c < ci; ++c) {
      const T* f = weight + (o * ci + c) * 9;
      T gf[3][6];  // column j of G f, stored as gf[j]
      for (std::size_t j = 0; j < 3; ++j) g_rows(f + j, 3, gf[j]);
      for (std::size_t i = 0; i < 6; ++i) {
        const T row[3] = {gf[0][i], gf[1][i], gf[2][i]};
        T r[6];
        g_rows(row, 1, r);
        for (std::size_t j = 0; j < 6; ++j) u[(6 * i + j) * co * ci + o * ci + c] = r[j];
      }
    }
  }

  constexpr std::size_t kTarget = std::size_t{1} << 20;
  const std::size_t band = std::clamp<std::size_t>(kTarget / (36 * std::max(ci, co) * tw), 1, th);
  // Padded input rows are split into four column phases p_q[x] = in[4x + q - 1],
  // so tile tx reads p0..p3 at tx and p0, p1 at tx + 1. The zero padding
  // beyond the last column is never overwritten.
  const std::size_t pl = tw + 1;
  std::vector<T> v(36 * ci * band * tw);
  std::vector<T> m(36 * co * band * tw);
  std::vector<T> padded(4 * pl, T(0));
  std::vector<T> phases(4 * pl);
  std::vector<T> hrow((4 * band + 2) * 6 * tw);
  std::vector<T> t(36 * tw);
  std::vector<T> y(4 * 4 * tw);
  std::vector<T> sbuf(24 * tw);

  for (std::size_t b = 0; b < batch; ++b) {
    const T* src = in + b * ci * h * w;
    T* dst = out + b * co * h * w;
    for (std::size_t ty0 = 0; ty0 < th; ty0 += band) {
      const std::size_t nb = std::min(band, th - ty0);
      const std::size_t n = nb * tw;

      // Rows 4 * ty0 - 1 ... 4 * (ty0 + nb) are needed; each one is padded,
      // split into column phases and transformed horizontally once.
      const std::size_t nrows = 4 * nb + 2;
      for (std::size_t c = 0; c < ci; ++c) {
        for (std::size_t k = 0; k < nrows; ++k) {
          T* hk = hrow.data() + k * 6 * tw;
          const auto iy = static_cast<std::ptrdiff_t>(4 * ty0 + k) - 1;
          if (iy < 0 || iy >= static_cast<std::ptrdiff_t>(h)) {
            std::fill(hk, hk + 6 * tw, T(0));
            continue;
          }
          std::memcpy(padded.data() + 1, src + (c * h + static_cast<std::size_t>(iy)) * w, w * sizeof(T));
          winograd_split_phases(padded.data(), phases.data(), pl);
          winograd_input_row(phases.data(), phases.data() + pl, phases.data() + 2 * pl,
                             phases.data() + 3 * pl, hk, tw, tw);
        }
        for (std::size_t r = 0; r < nb; ++r) {
          const T* h0 = hrow.data() + 4 * r * 6 * tw;
          winograd_input_columns(h0, t.data(), 6 * tw);
          for (std::size_t i = 0; i < 6; ++i) {
            for (std::size_t j = 0; j < 6; ++j) {
              std::memcpy(v.data() + (c * 36 + 6 * i + j) * n + r * tw, t.data() + (i * 6 + j) * tw,
                          tw * sizeof(T));
            }
          }
        }
      }

      const auto eco = static_cast<Eigen::Index>(co);
      const auto eci = static_cast<Eigen::Index>(ci);
      const auto en = static_cast<Eigen::Index>(n);
      for (std::size_t k = 0; k < 36; ++k) {
        const ConstMatMap<T> uk(u.data() + k * co * ci, eco, eci, Eigen::OuterStride<>(eci));
        const ConstMatMap<T> vk(v.data() + k * n, eci, en, Eigen::OuterStride<>(36 * en));
        MatMap<T> mk(m.data() + k * n, eco, en, Eigen::OuterStride<>(36 * en));
        mk.noalias() = uk * vk;
      }

      for (std::size_t o = 0; o < co; ++o) {
        const T bo = bias[o];
        for (std::size_t r = 0; r < nb; ++r) {
          winograd_output_rows(m.data() + o * 36 * n + r * tw, n, tw, bo, sbuf.data(), y.data());
          for (std::size_t i = 0; i < 4; ++i) {
            const std::size_t oy = 4 * (ty0 + r) + i;
            if (oy >= h) break;
            T* yi = y.data() + i * 4 * tw;
            activate_inplace(yi, w, act);
            std::memcpy(dst + (o * h + oy) * w, yi, w * sizeof(T));
          }
        }
      }
    }
  }
}

/// Convolution plus bias followed by `act`.
template <class T>
void conv_forward(const T* in, std::size_t batch, const ConvGeometry& g, const T* weight,
                  const T* bias, Activation act, T* out) {
  if (g.winograd()) {
    winograd_forward(in, batch, g, weight, bias, act, out);
    return;
  }
  const auto co = static_cast<Eigen::Index>(g.co);
  const auto patch = static_cast<Eigen::Index>(g.patch());
  const ConstMatMap<T> wmat(weight, co, patch, Eigen::OuterStride<>(patch));
  const std::size_t in_img = g.ci * g.h * g.w;
  const std::size_t out_plane = g.oh * g.ow;
  const std::size_t out_img = g.co * out_plane;

  std::vector<T> col;
  for (std::size_t b = 0; b < batch; ++b) {
    const T* src = in + b * in_img;
    T* dst = out + b * out_img;
    if (g.pointwise()) {
      const auto n = static_cast<Eigen::Index>(out_plane);
      const ConstMatMap<T> x(src, patch, n, Eigen::OuterStride<>(n));
      MatMap<T> y(dst, co, n, Eigen::OuterStride<>(n));
      y.noalias() = wmat * x;
    } else {
      const std::size_t band = g.band_rows();
      col.resize(g.patch() * band * g.ow);
      for (std::size_t y0 = 0; y0 < g.oh; y0 += band) {
        const std::size_t rows = std::min(band, g.oh - y0);
        const auto n = static_cast<Eigen::Index>(rows * g.ow);
        im2col(src, g, y0, rows, col.data());
        const ConstMatMap<T> x(col.data(), patch, n, Eigen::OuterStride<>(n));
        MatMap<T> y(dst + y0 * g.ow, co, n, Eigen::OuterStride<>(static_cast<Eigen::Index>(out_plane)));
        y.noalias() = wmat * x;
      }
    }
    for (std::size_t o = 0; o < g.co; ++o) {
      T* p = dst + o * out_plane;
      const T bv = bias[o];
      for (std::size_t i = 0; i < out_plane; ++i) p[i] += bv;
      activate_inplace(p, out_plane, act);
    }
  }
}

/// Accumulates gradients; any of grad_in / grad_weight / grad_bias may be null.
template <class T>
void conv_backward(const T* in, std::size_t batch, const ConvGeometry& g, const T* weight,
                   const T* grad_out, T* grad_in, T* grad_weight, T* grad_bias) {
  const auto co = static_cast<Eigen::Index>(g.co);
  const auto patch = static_cast<Eigen::Index>(g.patch());
  const ConstMatMap<T> wmat(weight, co, patch, Eigen::OuterStride<>(patch));
  const std::size_t in_img = g.ci * g.h * g.w;
  const std::size_t out_plane = g.oh * g.ow;
  const std::size_t out_img = g.co * out_plane;

  if (grad_bias != nullptr) {
    for (std::size_t b = 0; b < batch; ++b) {
      for (std::size_t o = 0; o < g.co; ++o) {
        const T* p = grad_out + b * out_img + o * out_plane;
        double acc = 0.0;
        for (std::size_t i = 0; i < out_plane; ++i) acc += p[i];
        grad_bias[o] += static_cast<T>(acc);
      }
    }
  }
  if (grad_in == nullptr && grad_weight == nullptr) return;

  if (grad_in != nullptr && g.winograd()) {
    // dx is the same-padded convolution of dy with the flipped, transposed kernel.
    std::vector<T> flipped(g.ci * g.co * 9);
    for (std::size_t o = 0; o < g.co; ++o) {
      for (std::size_t i = 0; i < g.ci; ++i) {
        for (std::size_t k = 0; k < 9; ++k) flipped[(i * g.co + o) * 9 + (8 - k)] = weight[(o * g.ci + i) * 9 + k];
      }
    }
    const ConvGeometry gt{g.co, g.oh, g.ow, g.ci, 3, 1, 1, g.h, g.w};
    const std::vector<T> zero_bias(g.ci, T(0));
    std::vector<T> dx(batch * in_img);
    winograd_forward(grad_out, batch, gt, flipped.data(), zero_bias.data(), Activation::none(), dx.data());
    for (std::size_t i = 0; i < dx.size(); ++i) grad_in[i] += dx[i];
    grad_in = nullptr;
    if (grad_weight == nullptr) return;
  }

  std::vector<T> col;
  std::vector<T> dcol;
  for (std::size_t b = 0; b < batch; ++b) {
    const T* src = in + b * in_img;
    const T* dy = grad_out + b * out_img;
    T* dx = grad_in != nullptr ? grad_in + b * in_img : nullptr;
    if (g.pointwise()) {
      const auto n = static_cast<Eigen::Index>(out_plane);
      const ConstMatMap<T> dymat(dy, co, n, Eigen::OuterStride<>(n));
      if (grad_weight != nullptr) {
        const ConstMatMap<T> x(src, patch, n, Eigen::OuterStride<>(n));
        MatMap<T> gw(grad_weight, co, patch, Eigen::OuterStride<>(patch));
        gw.noalias() += dymat * x.transpose();
      }
      if (dx != nullptr) {
        MatMap<T> gx(dx, patch, n, Eigen::OuterStride<>(n));
        gx.noalias() += wmat.transpose() * dymat;
      }
      continue;
    }
    const std::size_t band = g.band_rows();
    for (std::size_t y0 = 0; y0 < g.oh; y0 += band) {
      const std::size_t rows = std::min(band, g.oh - y0);
      const auto n = static_cast<Eigen::Index>(rows * g.ow);
      const ConstMatMap<T> dymat(dy + y0 * g.ow, co, n,
                                 Eigen::OuterStride<>(static_cast<Eigen::Index>(out_plane)));
      if (grad_weight != nullptr) {
        col.resize(g.patch() * rows * g.ow);
        im2col(src, g, y0, rows, col.data());
        const ConstMatMap<T> x(col.data(), patch, n, Eigen::OuterStride<>(n));
        MatMap<T> gw(grad_weight, co, patch, Eigen::OuterStride<>(patch));
        gw.noalias() += dymat * x.transpose();
      }
      if (dx != nullptr) {
        dcol.resize(g.patch() * rows * g.ow);
        MatMap<T> dc(dcol.data(), patch, n, Eigen::OuterStride<>(n));
        dc.noalias() = wmat.transpose() * dymat;
        col2im_add(dcol.data(), g, y0, rows, dx);
      }
    }
  }
}

}  // namespace detail

/// Zero-padded 2-D convolution with per-channel bias, followed by `act`.
template <std::floating_point T>
BasicTensor<T> conv2d(const BasicTensor<T>& input, const ConvParams<T>& params,
                      Activation act = Activation::none()) {
  const Shape is = input.shape();
  const Shape ws = params.weight.shape();
  if (ws.h != ws.w) throw ShapeError("conv2d: kernel must be square, got " + ws.str());
  if (is.c != ws.c) {
    throw ShapeError("conv2d: input has " + std::to_string(is.c) + " channels but kernel expects " +
                     std::to_string(ws.c));
  }
  if (params.bias.numel() != ws.n) {
    throw ShapeError("conv2d: bias length " + std::to_string(params.bias.numel()) +
                     " does not match " + std::to_string(ws.n) + " output channels");
  }
  const std::size_t k = ws.h;
  const std::size_t s = params.stride;
  const std::size_t p = params.padding;
  if (s == 0) throw ShapeError("conv2d: stride must be positive");
  if (is.h + 2 * p < k || is.w + 2 * p < k) {
    throw ShapeError("conv2d: input " + is.str() + " yields a non-positive output size");
  }
  const detail::ConvGeometry g{is.c, is.h, is.w, ws.n, k, s, p,
                               (is.h + 2 * p - k) / s + 1, (is.w + 2 * p - k) / s + 1};
  const Shape os{is.n, ws.n, g.oh, g.ow};

  std::vector<T> out(os.numel());
  detail::conv_forward(input.data().data(), is.n, g, params.weight.data().data(),
                       params.bias.data().data(), act, out.data());

  return BasicTensor<T>::make_result(
      os, std::move(out), {&input, &params.weight, &params.bias},
      [g, act, batch = is.n](detail::Node<T>& self) {
        auto gin = self.input_grad(0);
        auto gw = self.input_grad(1);
        auto gb = self.input_grad(2);
        const T* dy = self.grad.data();
        std::vector<T> scaled;
        if (act.kind != ActivationKind::kNone) {
          scaled.assign(self.grad.begin(), self.grad.end());
          detail::scale_by_derivative(scaled.data(), self.value.data(), scaled.size(), act);
          dy = scaled.data();
        }
        detail::conv_backward(self.input_value(0).data(), batch, g, self.input_value(1).data(), dy,
                              gin.empty() ? nullptr : gin.data(), gw.empty() ? nullptr : gw.data(),
                              gb.empty() ? nullptr : gb.data());
      });
}

}  // namespace ddfuse
