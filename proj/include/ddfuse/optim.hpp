// Copyright 2026 The ddfuse Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <vector>

#include "ddfuse/tensor.hpp"

namespace ddfuse {

struct AdamOptions {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

/// First/second moment buffers, one per parameter, in parameter order.
template <std::floating_point T>
struct AdamState {
  AdamOptions options;
  std::vector<std::vector<T>> first_moment;
  std::vector<std::vector<T>> second_moment;
  std::uint64_t step = 0;

  AdamState() = default;
  AdamState(std::span<const BasicTensor<T>> params, AdamOptions opts = {}) : options(opts) {
    for (const auto& p : params) {
      first_moment.emplace_back(p.numel(), T(0));
      second_moment.emplace_back(p.numel(), T(0));
    }
  }
};

/// One bias-corrected Adam update using each parameter's accumulated gradient.
/// Parameters that never received a gradient are treated as having g = 0.
template <std::floating_point T>
void adam_step(std::span<BasicTensor<T>> params, AdamState<T>& state, double lr) {
  if (state.first_moment.size() != params.size()) {
    throw ShapeError("adam_step: state tracks " + std::to_string(state.first_moment.size()) +
                     " parameters, got " + std::to_string(params.size()));
  }
  if (!(lr > 0.0)) throw ContractError("adam_step: learning rate must be positive");
  ++state.step;
  const auto& o = state.options;
  const double t = static_cast<double>(state.step);
  const double c1 = 1.0 - std::pow(o.beta1, t);
  const double c2 = 1.0 - std::pow(o.beta2, t);
  for (std::size_t k = 0; k < params.size(); ++k) {
    auto& p = params[k];
    auto& m = state.first_moment[k];
    auto& v = state.second_moment[k];
    if (m.size() != p.numel()) throw ShapeError("adam_step: moment buffer size mismatch");
    const auto g = p.grad();
    auto x = p.mutable_data();
    for (std::size_t i = 0; i < x.size(); ++i) {
      const double gi = g.empty() ? 0.0 : static_cast<double>(g[i]);
      const double mi = o.beta1 * m[i] + (1.0 - o.beta1) * gi;
      const double vi = o.beta2 * v[i] + (1.0 - o.beta2) * gi * gi;
      m[i] = static_cast<T>(mi);
      v[i] = static_cast<T>(vi);
      const double update = lr * (mi / c1) / (std::sqrt(vi / c2) + o.eps);
      x[i] = static_cast<T>(static_cast<double>(x[i]) - update);
    }
  }
}

/// Multiplies the learning rate by `factor` once the monitored loss has failed
/// to strictly improve for more than `patience` consecutive updates.
struct PlateauScheduler {
  double current_lr = 1e-3;
  double factor = 0.5;
  int patience = 5;
  double min_lr = 1e-8;
  double best_loss = std::numeric_limits<double>::infinity();
  int epochs_since_improvement = 0;

  PlateauScheduler() = default;
  explicit PlateauScheduler(double initial_lr) : current_lr(initial_lr) {}

  double update(double epoch_loss) {
    if (epoch_loss < best_loss) {
      best_loss = epoch_loss;
      epochs_since_improvement = 0;
    } else if (++epochs_since_improvement > patience) {
      current_lr = std::max(current_lr * factor, min_lr);
      epochs_since_improvement = 0;
    }
    return current_lr;
  }
};

}  // namespace ddfuse
