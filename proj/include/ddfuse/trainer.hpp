// Copyright 2026 The ddfuse Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <string>
#include <vector>

#include "ddfuse/checkpoint.hpp"
#include "ddfuse/discriminator.hpp"
#include "ddfuse/image_io.hpp"
#include "ddfuse/losses.hpp"
#include "ddfuse/model.hpp"
#include "ddfuse/optim.hpp"

namespace ddfuse {

struct TrainConfig {
  std::size_t batch_size = 64;
  double initial_lr = 1e-3;
  std::size_t max_epochs = 1000;
  std::size_t image_size = 256;
  std::uint64_t seed = 0;
  std::filesystem::path dataset;
  LossWeights weights;
  double disc_lr = 1e-3;
  std::size_t checkpoint_every = 0;  // epochs between checkpoints; 0 = final only
  std::filesystem::path out_dir;     // log and checkpoints; empty = write nothing
  std::filesystem::path final_checkpoint;  // defaults to out_dir/model.ddnf

  void validate() const {
    if (batch_size < 1) throw ConfigError("batch size must be >= 1");
    if (image_size == 0 || image_size % 4 != 0) {
      throw ConfigError("image size must be a positive multiple of 4, got " + std::to_string(image_size));
    }
    if (!(initial_lr > 0.0)) throw ConfigError("learning rate must be positive");
    if (!(disc_lr > 0.0)) throw ConfigError("discriminator learning rate must be positive");
    if (weights.adversarial < 0 || weights.pixel < 0 || weights.ssim < 0) {
      throw ConfigError("loss weights must be nonnegative");
    }
  }
};

/// One row of the training log.
struct EpochLog {
  std::size_t epoch = 0;  // 1-based
  double lr = 0;
  double detail = 0;
  double adversarial = 0;
  double pixel = 0;
  double ssim = 0;
  double total = 0;
  double wall_seconds = 0;

  /// epoch, lr, L_detail, L_adv, L_pix, L_ssim, total, wall_seconds (tab separated)
  [[nodiscard]] std::string tsv() const {
    char buf[320];
    std::snprintf(buf, sizeof buf, "%zu\t%.9g\t%.9g\t%.9g\t%.9g\t%.9g\t%.9g\t%.3f", epoch, lr, detail,
                  adversarial, pixel, ssim, total, wall_seconds);
    return buf;
  }
};

struct StepLog {
  std::size_t step = 0;  // 1-based generator step
  std::size_t epoch = 0;
  double detail = 0;
  double adversarial = 0;
  double pixel = 0;
  double ssim = 0;
  double total = 0;
  double critic = 0;  // discriminator loss; 0 when the adversarial weight is 0
};

struct TrainHooks {
  std::function<void(const StepLog&)> on_step;
  std::function<void(const EpochLog&)> on_epoch;
};

struct TrainResult {
  std::vector<EpochLog> epochs;
  std::vector<StepLog> steps;
  std::size_t skipped_files = 0;
};

namespace detail {

template <std::floating_point T>
double checked(const BasicTensor<T>& t, const char* component, std::size_t epoch, std::size_t step) {
  const double v = static_cast<double>(t.item());
  if (!std::isfinite(v)) {
    throw NumericError(component, std::string("non-finite ") + component + " at epoch " +
                                      std::to_string(epoch) + ", step " + std::to_string(step));
  }
  return v;
}

}  // namespace detail

/// Alternating least-squares GAN training: per batch one critic update on the
/// critic loss, then one generator update on the weighted total loss. With a
/// zero adversarial weight the critic is never updated. The generator learning
/// rate follows a plateau schedule on the epoch-mean total loss.
template <std::floating_point T>
TrainResult train(DecompositionModel<T>& model, Discriminator<T>& disc, DatasetIterator& data,
                  const TrainConfig& cfg, const TrainHooks& hooks = {}) {
  cfg.validate();
  std::ofstream log;
  if (!cfg.out_dir.empty()) {
    std::filesystem::create_directories(cfg.out_dir);
    log.open(cfg.out_dir / "train_log.tsv", std::ios::trunc);
    if (!log) throw std::runtime_error((cfg.out_dir / "train_log.tsv").string() + ": cannot open");
  }

  auto gen_params = model.parameters();
  auto disc_params = disc.parameters();
  AdamState<T> gen_state{std::span<const BasicTensor<T>>(gen_params)};
  AdamState<T> disc_state{std::span<const BasicTensor<T>>(disc_params)};
  PlateauScheduler scheduler(cfg.initial_lr);
  const bool adversarial = cfg.weights.adversarial > 0.0;

  TrainResult result;
  std::size_t step = 0;
  const auto t0 = std::chrono::steady_clock::now();

  for (std::size_t epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
    EpochLog row;
    row.epoch = epoch;
    row.lr = scheduler.current_lr;
    std::size_t seen = 0;

    data.for_each_batch<T>(epoch - 1, [&](const BasicTensor<T>& batch) {
      ++step;
      StepLog s;
      s.step = step;
      s.epoch = epoch;

      const auto d = forward(model, batch, true);
      const auto rec = reconstruction_loss(d.re, batch);
      const auto i_down = downsample_reference(batch);
      LossParts<T> parts;
      parts.detail = detail_loss(d, laplacian_target(batch));
      parts.pixel = rec.pixel;
      parts.ssim = rec.ssim;

      if (adversarial) {
        disc.zero_grad();
        const auto critic = discriminator_loss(disc, d.s, i_down);
        s.critic = detail::checked(critic, "L_D", epoch, step);
        critic.backward();
        adam_step(std::span<BasicTensor<T>>(disc_params), disc_state, cfg.disc_lr);
        parts.adversarial = generator_adversarial_loss(disc, d.s);
      } else {
        NoGradGuard no_grad;
        parts.adversarial = generator_adversarial_loss(disc, d.s.detach());
      }

      s.detail = detail::checked(parts.detail, "L_detail", epoch, step);
      s.adversarial = detail::checked(parts.adversarial, "L_adv", epoch, step);
      s.pixel = detail::checked(parts.pixel, "L_pix", epoch, step);
      s.ssim = detail::checked(parts.ssim, "L_ssim", epoch, step);
      const auto total = total_generator_loss(parts, cfg.weights);
      s.total = detail::checked(total, "total", epoch, step);

      model.zero_grad();
      total.backward();
      adam_step(std::span<BasicTensor<T>>(gen_params), gen_state, scheduler.current_lr);

      const auto n = static_cast<double>(batch.shape().n);
      row.detail += s.detail * n;
      row.adversarial += s.adversarial * n;
      row.pixel += s.pixel * n;
      row.ssim += s.ssim * n;
      row.total += s.total * n;
      seen += batch.shape().n;
      result.steps.push_back(s);
      if (hooks.on_step) hooks.on_step(s);
    });

    if (seen == 0) throw ContractError("train: no decodable images in the dataset");
    const double inv = 1.0 / static_cast<double>(seen);
    row.detail *= inv;
    row.adversarial *= inv;
    row.pixel *= inv;
    row.ssim *= inv;
    row.total *= inv;
    row.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    scheduler.update(row.total);

    result.epochs.push_back(row);
    if (log.is_open()) log << row.tsv() << '\n' << std::flush;
    if (hooks.on_epoch) hooks.on_epoch(row);
    if (!cfg.out_dir.empty() && cfg.checkpoint_every > 0 && epoch % cfg.checkpoint_every == 0) {
      char name[64];
      std::snprintf(name, sizeof name, "checkpoint_epoch_%04zu.ddnf", epoch);
      save_checkpoint(model, cfg.out_dir / name, &disc);
    }
  }

  if (!cfg.final_checkpoint.empty()) {
    save_checkpoint(model, cfg.final_checkpoint, &disc);
  } else if (!cfg.out_dir.empty()) {
    save_checkpoint(model, cfg.out_dir / "model.ddnf", &disc);
  }
  result.skipped_files = data.skipped();
  return result;
}

}  // namespace ddfuse
