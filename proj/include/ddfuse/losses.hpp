// Copyright 2026 The ddfuse Authors
// SPDX-License-Identifier: Apache-2.0
//
// Training objective:
//
//   total = sum_i MSE(lap(x), g_i) + w_adv * L_G + w_pix * MSE(x, re)
//           + w_ssim * (1 - SSIM(x, re))
//
// with lap the 8-neighbour Laplacian and L_G the least-squares generator term
// evaluated on the semantic image.
#pragma once

#include <cstddef>

#include "ddfuse/baselines.hpp"
#include "ddfuse/model.hpp"
#include "ddfuse/ops.hpp"

namespace ddfuse {

struct LossWeights {
  double adversarial = 0.1;
  double pixel = 100.0;
  double ssim = 10.0;
};

struct SsimOptions {
  std::size_t window = 8;
  double k1 = 0.01;
  double k2 = 0.03;
  double data_range = 1.0;
};

/// Fixed regression target for the high-frequency images (no tape history).
template <std::floating_point T>
BasicTensor<T> laplacian_target(const BasicTensor<T>& image) {
  return laplacian_filter(image, LaplacianKernel::kG2);
}

template <std::floating_point T>
BasicTensor<T> detail_loss(const Decomposition<T>& d, const BasicTensor<T>& target) {
  return add(add(mse(target, d.g1), mse(target, d.g2)), mse(target, d.g3));
}

/// Mean SSIM over all valid window positions of every batch item, using a
/// uniform window. Differentiable in both arguments.
template <std::floating_point T>
BasicTensor<T> ssim(const BasicTensor<T>& x, const BasicTensor<T>& y, const SsimOptions& opt = {}) {
  detail::require_same_shape(x, y, "ssim");
  if (x.shape().c != 1) throw ShapeError("ssim: expected single-channel images, got " + x.shape().str());
  if (x.shape().h < opt.window || x.shape().w < opt.window) {
    throw ContractError("ssim: image " + std::to_string(x.shape().h) + "x" +
                        std::to_string(x.shape().w) + " is smaller than the " +
                        std::to_string(opt.window) + "x" + std::to_string(opt.window) + " window");
  }
  const T c1 = static_cast<T>((opt.k1 * opt.data_range) * (opt.k1 * opt.data_range));
  const T c2 = static_cast<T>((opt.k2 * opt.data_range) * (opt.k2 * opt.data_range));
  const std::size_t k = opt.window;

  const auto mu_x = box_mean(x, k);
  const auto mu_y = box_mean(y, k);
  const auto mu_xx = mul(mu_x, mu_x);
  const auto mu_yy = mul(mu_y, mu_y);
  const auto mu_xy = mul(mu_x, mu_y);
  const auto var_x = sub(box_mean(mul(x, x), k), mu_xx);
  const auto var_y = sub(box_mean(mul(y, y), k), mu_yy);
  const auto cov = sub(box_mean(mul(x, y), k), mu_xy);

  const auto num = mul(add_scalar(scalar_mul(mu_xy, T(2)), c1), add_scalar(scalar_mul(cov, T(2)), c2));
  const auto den = mul(add_scalar(add(mu_xx, mu_yy), c1), add_scalar(add(var_x, var_y), c2));
  return mean(div(num, den));
}

template <std::floating_point T>
struct ReconstructionLoss {
  BasicTensor<T> pixel;  // MSE(ori, re)
  BasicTensor<T> ssim;   // 1 - SSIM(ori, re)
};

template <std::floating_point T>
ReconstructionLoss<T> reconstruction_loss(const BasicTensor<T>& re, const BasicTensor<T>& ori,
                                          const SsimOptions& opt = {}) {
  detail::require_same_shape(re, ori, "reconstruction_loss");
  return {mse(ori, re), add_scalar(scalar_mul(ssim(ori, re, opt), T(-1)), T(1))};
}

/// Two successive 2x2 mean poolings: (n, 1, h, w) -> (n, 1, h/4, w/4).
template <std::floating_point T>
BasicTensor<T> downsample_reference(const BasicTensor<T>& image) {
  const Shape s = image.shape();
  if (s.h % 4 != 0 || s.w % 4 != 0) {
    throw ContractError("downsample_reference: height and width must be divisible by 4, got " +
                        std::to_string(s.h) + "x" + std::to_string(s.w));
  }
  NoGradGuard no_grad;
  return avg_pool(avg_pool(image.detach(), 2), 2);
}

template <std::floating_point T>
struct AdversarialLosses {
  BasicTensor<T> generator;      // mean (D(i_s) - 1)^2
  BasicTensor<T> discriminator;  // mean (D(i_down) - 1)^2 + mean D(i_s)^2
};

namespace detail {

template <std::floating_point T>
BasicTensor<T> mean_squared_distance_to(const BasicTensor<T>& scores, T target) {
  return mse(scores, BasicTensor<T>::full(scores.shape(), target));
}

}  // namespace detail

/// Least-squares generator term. `disc` maps (n, 1, h, w) to n scores.
template <std::floating_point T, class Disc>
BasicTensor<T> generator_adversarial_loss(const Disc& disc, const BasicTensor<T>& i_s) {
  return detail::mean_squared_distance_to(disc(i_s), T(1));
}

/// Least-squares critic term. The semantic image is treated as a constant.
template <std::floating_point T, class Disc>
BasicTensor<T> discriminator_loss(const Disc& disc, const BasicTensor<T>& i_s, const BasicTensor<T>& i_down) {
  detail::require_same_shape(i_s, i_down, "discriminator_loss");
  return add(detail::mean_squared_distance_to(disc(i_down), T(1)),
             detail::mean_squared_distance_to(disc(i_s.detach()), T(0)));
}

template <std::floating_point T, class Disc>
AdversarialLosses<T> adversarial_losses(const Disc& disc, const BasicTensor<T>& i_s,
                                        const BasicTensor<T>& i_down) {
  detail::require_same_shape(i_s, i_down, "adversarial_losses");
  return {generator_adversarial_loss(disc, i_s), discriminator_loss(disc, i_s, i_down)};
}

template <std::floating_point T>
struct LossParts {
  BasicTensor<T> detail;
  BasicTensor<T> adversarial;
  BasicTensor<T> pixel;
  BasicTensor<T> ssim;
};

template <std::floating_point T>
BasicTensor<T> total_generator_loss(const LossParts<T>& parts, const LossWeights& w) {
  auto total = add(parts.detail, scalar_mul(parts.adversarial, static_cast<T>(w.adversarial)));
  total = add(total, scalar_mul(parts.pixel, static_cast<T>(w.pixel)));
  return add(total, scalar_mul(parts.ssim, static_cast<T>(w.ssim)));
}

}  // namespace ddfuse
