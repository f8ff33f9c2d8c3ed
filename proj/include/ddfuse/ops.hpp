// Copyright 2026 The ddfuse Authors
// SPDX-License-Identifier: Apache-2.0
//
// Differentiable elementwise, resampling and reduction operations.
#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "ddfuse/activation.hpp"
#include "ddfuse/tensor.hpp"

namespace ddfuse {

namespace detail {

template <std::floating_point T>
void require_same_shape(const BasicTensor<T>& a, const BasicTensor<T>& b, const char* op) {
  if (a.shape() != b.shape()) {
    throw ShapeError(std::string(op) + ": shape mismatch " + a.shape().str() + " vs " +
                     b.shape().str());
  }
}

/// y = f(x) with dy/dx = df(x, y).
template <std::floating_point T, class F, class DF>
BasicTensor<T> unary(const BasicTensor<T>& x, F f, DF df) {
  const auto xs = x.data();
  std::vector<T> out(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i) out[i] = f(xs[i]);
  return BasicTensor<T>::make_result(x.shape(), std::move(out), {&x}, [df](Node<T>& self) {
    auto gx = self.input_grad(0);
    const auto xv = self.input_value(0);
    for (std::size_t i = 0; i < gx.size(); ++i) {
      gx[i] += self.grad[i] * df(xv[i], self.value[i]);
    }
  });
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Elementwise arithmetic (same shape only, no broadcasting).

template <std::floating_point T>
BasicTensor<T> add(const BasicTensor<T>& a, const BasicTensor<T>& b) {
  detail::require_same_shape(a, b, "add");
  const auto av = a.data();
  const auto bv = b.data();
  std::vector<T> out(av.size());
  for (std::size_t i = 0; i < av.size(); ++i) out[i] = av[i] + bv[i];
  return BasicTensor<T>::make_result(a.shape(), std::move(out), {&a, &b}, [](detail::Node<T>& self) {
    for (std::size_t k = 0; k < 2; ++k) {
      auto g = self.input_grad(k);
      for (std::size_t i = 0; i < g.size(); ++i) g[i] += self.grad[i];
    }
  });
}

template <std::floating_point T>
BasicTensor<T> sub(const BasicTensor<T>& a, const BasicTensor<T>& b) {
  detail::require_same_shape(a, b, "sub");
  const auto av = a.data();
  const auto bv = b.data();
  std::vector<T> out(av.size());
  for (std::size_t i = 0; i < av.size(); ++i) out[i] = av[i] - bv[i];
  return BasicTensor<T>::make_result(a.shape(), std::move(out), {&a, &b}, [](detail::Node<T>& self) {
    auto ga = self.input_grad(0);
    for (std::size_t i = 0; i < ga.size(); ++i) ga[i] += self.grad[i];
    auto gb = self.input_grad(1);
    for (std::size_t i = 0; i < gb.size(); ++i) gb[i] -= self.grad[i];
  });
}

template <std::floating_point T>
BasicTensor<T> mul(const BasicTensor<T>& a, const BasicTensor<T>& b) {
  detail::require_same_shape(a, b, "mul");
  const auto av = a.data();
  const auto bv = b.data();
  std::vector<T> out(av.size());
  for (std::size_t i = 0; i < av.size(); ++i) out[i] = av[i] * bv[i];
  return BasicTensor<T>::make_result(a.shape(), std::move(out), {&a, &b}, [](detail::Node<T>& self) {
    const auto av = self.input_value(0);
    const auto bv = self.input_value(1);
    auto ga = self.input_grad(0);
    for (std::size_t i = 0; i < ga.size(); ++i) ga[i] += self.grad[i] * bv[i];
    auto gb = self.input_grad(1);
    for (std::size_t i = 0; i < gb.size(); ++i) gb[i] += self.grad[i] * av[i];
  });
}

template <std::floating_point T>
BasicTensor<T> div(const BasicTensor<T>& a, const BasicTensor<T>& b) {
  detail::require_same_shape(a, b, "div");
  const auto av = a.data();
  const auto bv = b.data();
  std::vector<T> out(av.size());
  for (std::size_t i = 0; i < av.size(); ++i) out[i] = av[i] / bv[i];
  return BasicTensor<T>::make_result(a.shape(), std::move(out), {&a, &b}, [](detail::Node<T>& self) {
    const auto bv = self.input_value(1);
    auto ga = self.input_grad(0);
    for (std::size_t i = 0; i < ga.size(); ++i) ga[i] += self.grad[i] / bv[i];
    auto gb = self.input_grad(1);
    for (std::size_t i = 0; i < gb.size(); ++i) gb[i] -= self.grad[i] * self.value[i] / bv[i];
  });
}

template <std::floating_point T>
BasicTensor<T> scalar_mul(const BasicTensor<T>& x, T s) {
  return detail::unary(x, [s](T v) { return v * s; }, [s](T, T) { return s; });
}

template <std::floating_point T>
BasicTensor<T> add_scalar(const BasicTensor<T>& x, T s) {
  return detail::unary(x, [s](T v) { return v + s; }, [](T, T) { return T(1); });
}

template <std::floating_point T>
BasicTensor<T> square(const BasicTensor<T>& x) {
  return detail::unary(x, [](T v) { return v * v; }, [](T v, T) { return T(2) * v; });
}

template <std::floating_point T>
BasicTensor<T> operator+(const BasicTensor<T>& a, const BasicTensor<T>& b) { return add(a, b); }
template <std::floating_point T>
BasicTensor<T> operator-(const BasicTensor<T>& a, const BasicTensor<T>& b) { return sub(a, b); }
template <std::floating_point T>
BasicTensor<T> operator*(const BasicTensor<T>& a, const BasicTensor<T>& b) { return mul(a, b); }
template <std::floating_point T>
BasicTensor<T> operator*(const BasicTensor<T>& a, T s) { return scalar_mul(a, s); }
template <std::floating_point T>
BasicTensor<T> operator*(T s, const BasicTensor<T>& a) { return scalar_mul(a, s); }

// ---------------------------------------------------------------------------
// Activations.

template <std::floating_point T>
BasicTensor<T> relu(const BasicTensor<T>& x) {
  return detail::unary(
      x, [](T v) { return v > T(0) ? v : T(0); }, [](T v, T) { return v > T(0) ? T(1) : T(0); });
}

template <std::floating_point T>
BasicTensor<T> leaky_relu(const BasicTensor<T>& x, T slope) {
  return detail::unary(
      x, [slope](T v) { return v > T(0) ? v : slope * v; },
      [slope](T v, T) { return v > T(0) ? T(1) : slope; });
}

template <std::floating_point T>
BasicTensor<T> tanh(const BasicTensor<T>& x) {
  return detail::unary(
      x, [](T v) { return std::tanh(v); }, [](T, T y) { return T(1) - y * y; });
}

template <std::floating_point T>
BasicTensor<T> activate(const BasicTensor<T>& x, Activation a) {
  switch (a.kind) {
    case ActivationKind::kRelu: return relu(x);
    case ActivationKind::kLeakyRelu: return leaky_relu(x, static_cast<T>(a.slope));
    case ActivationKind::kTanh: return tanh(x);
    case ActivationKind::kNone: break;
  }
  return x;
}

// ---------------------------------------------------------------------------
// Resampling.

/// Replicates each pixel into a factor x factor block.
template <std::floating_point T>
BasicTensor<T> upsample_nearest(const BasicTensor<T>& x, std::size_t factor) {
  if (factor < 1) throw ContractError("upsample_nearest: factor must be >= 1");
  const Shape in = x.shape();
  const Shape out{in.n, in.c, in.h * factor, in.w * factor};
  const auto xv = x.data();
  std::vector<T> y(out.numel());
  for (std::size_t p = 0; p < in.n * in.c; ++p) {
    const T* src = xv.data() + p * in.plane();
    T* dst = y.data() + p * out.plane();
    for (std::size_t oy = 0; oy < out.h; ++oy) {
      const T* srow = src + (oy / factor) * in.w;
      T* drow = dst + oy * out.w;
      for (std::size_t ox = 0; ox < out.w; ++ox) drow[ox] = srow[ox / factor];
    }
  }
  return BasicTensor<T>::make_result(out, std::move(y), {&x}, [in, out, factor](detail::Node<T>& self) {
    auto gx = self.input_grad(0);
    for (std::size_t p = 0; p < in.n * in.c; ++p) {
      T* gsrc = gx.data() + p * in.plane();
      const T* gdst = self.grad.data() + p * out.plane();
      for (std::size_t oy = 0; oy < out.h; ++oy) {
        T* grow = gsrc + (oy / factor) * in.w;
        const T* drow = gdst + oy * out.w;
        for (std::size_t ox = 0; ox < out.w; ++ox) grow[ox / factor] += drow[ox];
      }
    }
  });
}

/// Non-overlapping factor x factor mean pooling; h and w must be divisible by factor.
template <std::floating_point T>
BasicTensor<T> avg_pool(const BasicTensor<T>& x, std::size_t factor) {
  const Shape in = x.shape();
  if (factor < 1 || in.h % factor != 0 || in.w % factor != 0) {
    throw ContractError("avg_pool: spatial size " + std::to_string(in.h) + "x" +
                        std::to_string(in.w) + " is not divisible by " + std::to_string(factor));
  }
  const Shape out{in.n, in.c, in.h / factor, in.w / factor};
  const auto xv = x.data();
  const double inv = 1.0 / static_cast<double>(factor * factor);
  std::vector<T> y(out.numel());
  for (std::size_t p = 0; p < in.n * in.c; ++p) {
    const T* src = xv.data() + p * in.plane();
    T* dst = y.data() + p * out.plane();
    for (std::size_t oy = 0; oy < out.h; ++oy) {
      for (std::size_t ox = 0; ox < out.w; ++ox) {
        double acc = 0.0;
        for (std::size_t dy = 0; dy < factor; ++dy) {
          for (std::size_t dx = 0; dx < factor; ++dx) {
            acc += src[(oy * factor + dy) * in.w + ox * factor + dx];
          }
        }
        dst[oy * out.w + ox] = static_cast<T>(acc * inv);
      }
    }
  }
  return BasicTensor<T>::make_result(out, std::move(y), {&x}, [in, out, factor, inv](detail::Node<T>& self) {
    auto gx = self.input_grad(0);
    const T scale = static_cast<T>(inv);
    for (std::size_t p = 0; p < in.n * in.c; ++p) {
      T* gsrc = gx.data() + p * in.plane();
      const T* gdst = self.grad.data() + p * out.plane();
      for (std::size_t iy = 0; iy < in.h; ++iy) {
        for (std::size_t ix = 0; ix < in.w; ++ix) {
          gsrc[iy * in.w + ix] += gdst[(iy / factor) * out.w + ix / factor] * scale;
        }
      }
    }
  });
}

/// Mean over every valid k x k window (stride 1, no padding).
template <std::floating_point T>
BasicTensor<T> box_mean(const BasicTensor<T>& x, std::size_t k) {
  const Shape in = x.shape();
  if (k < 1 || in.h < k || in.w < k) {
    throw ContractError("box_mean: image " + std::to_string(in.h) + "x" + std::to_string(in.w) +
                        " is smaller than the " + std::to_string(k) + "x" + std::to_string(k) +
                        " window");
  }
  const Shape out{in.n, in.c, in.h - k + 1, in.w - k + 1};
  const auto xv = x.data();
  const double inv = 1.0 / static_cast<double>(k * k);
  std::vector<T> y(out.numel());
  std::vector<double> colsum(in.w);
  for (std::size_t p = 0; p < in.n * in.c; ++p) {
    const T* src = xv.data() + p * in.plane();
    T* dst = y.data() + p * out.plane();
    for (std::size_t oy = 0; oy < out.h; ++oy) {
      for (std::size_t ix = 0; ix < in.w; ++ix) {
        double s = 0.0;
        for (std::size_t dy = 0; dy < k; ++dy) s += src[(oy + dy) * in.w + ix];
        colsum[ix] = s;
      }
      for (std::size_t ox = 0; ox < out.w; ++ox) {
        double s = 0.0;
        for (std::size_t dx = 0; dx < k; ++dx) s += colsum[ox + dx];
        dst[oy * out.w + ox] = static_cast<T>(s * inv);
      }
    }
  }
  return BasicTensor<T>::make_result(out, std::move(y), {&x}, [in, out, k, inv](detail::Node<T>& self) {
    auto gx = self.input_grad(0);
    const T scale = static_cast<T>(inv);
    for (std::size_t p = 0; p < in.n * in.c; ++p) {
      T* gsrc = gx.data() + p * in.plane();
      const T* gdst = self.grad.data() + p * out.plane();
      for (std::size_t oy = 0; oy < out.h; ++oy) {
        for (std::size_t ox = 0; ox < out.w; ++ox) {
          const T g = gdst[oy * out.w + ox] * scale;
          for (std::size_t dy = 0; dy < k; ++dy) {
            T* row = gsrc + (oy + dy) * in.w + ox;
            for (std::size_t dx = 0; dx < k; ++dx) row[dx] += g;
          }
        }
      }
    }
  });
}

// ---------------------------------------------------------------------------
// Reductions. Accumulation is sequential in double, so results are reproducible.

template <std::floating_point T>
BasicTensor<T> sum(const BasicTensor<T>& x) {
  double acc = 0.0;
  for (T v : x.data()) acc += v;
  return BasicTensor<T>::make_result({1, 1, 1, 1}, {static_cast<T>(acc)}, {&x}, [](detail::Node<T>& self) {
    auto gx = self.input_grad(0);
    for (T& g : gx) g += self.grad[0];
  });
}

template <std::floating_point T>
BasicTensor<T> mean(const BasicTensor<T>& x) {
  const std::size_t count = x.numel();
  if (count == 0) throw ContractError("mean of an empty tensor");
  double acc = 0.0;
  for (T v : x.data()) acc += v;
  const double inv = 1.0 / static_cast<double>(count);
  return BasicTensor<T>::make_result({1, 1, 1, 1}, {static_cast<T>(acc * inv)}, {&x},
                                     [inv](detail::Node<T>& self) {
                                       auto gx = self.input_grad(0);
                                       const T g = static_cast<T>(self.grad[0] * inv);
                                       for (T& v : gx) v += g;
                                     });
}

/// Mean over the spatial axes: (n, c, h, w) -> (n, c, 1, 1).
template <std::floating_point T>
BasicTensor<T> spatial_mean(const BasicTensor<T>& x) {
  const Shape in = x.shape();
  const Shape out{in.n, in.c, 1, 1};
  const std::size_t plane = in.plane();
  const double inv = 1.0 / static_cast<double>(plane);
  const auto xv = x.data();
  std::vector<T> y(out.numel());
  for (std::size_t p = 0; p < in.n * in.c; ++p) {
    double acc = 0.0;
    for (std::size_t i = 0; i < plane; ++i) acc += xv[p * plane + i];
    y[p] = static_cast<T>(acc * inv);
  }
  return BasicTensor<T>::make_result(out, std::move(y), {&x}, [plane, inv](detail::Node<T>& self) {
    auto gx = self.input_grad(0);
    for (std::size_t p = 0; p < self.grad.size(); ++p) {
      const T g = static_cast<T>(self.grad[p] * inv);
      for (std::size_t i = 0; i < plane; ++i) gx[p * plane + i] += g;
    }
  });
}

/// Mean squared error over all elements.
template <std::floating_point T>
BasicTensor<T> mse(const BasicTensor<T>& x, const BasicTensor<T>& y) {
  detail::require_same_shape(x, y, "mse");
  const std::size_t count = x.numel();
  if (count == 0) throw ContractError("mse of empty tensors");
  const auto xv = x.data();
  const auto yv = y.data();
  double acc = 0.0;
  for (std::size_t i = 0; i < count; ++i) {
    const double d = static_cast<double>(xv[i]) - static_cast<double>(yv[i]);
    acc += d * d;
  }
  const double inv = 1.0 / static_cast<double>(count);
  return BasicTensor<T>::make_result({1, 1, 1, 1}, {static_cast<T>(acc * inv)}, {&x, &y},
                                     [inv](detail::Node<T>& self) {
                                       const auto xv = self.input_value(0);
                                       const auto yv = self.input_value(1);
                                       const T k = static_cast<T>(2.0 * inv) * self.grad[0];
                                       auto gx = self.input_grad(0);
                                       for (std::size_t i = 0; i < gx.size(); ++i) gx[i] += k * (xv[i] - yv[i]);
                                       auto gy = self.input_grad(1);
                                       for (std::size_t i = 0; i < gy.size(); ++i) gy[i] -= k * (xv[i] - yv[i]);
                                     });
}

}  // namespace ddfuse
