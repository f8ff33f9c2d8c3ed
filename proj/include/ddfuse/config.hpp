// Copyright 2026 The ddfuse Authors
// SPDX-License-Identifier: Apache-2.0
//
// key = value training configuration files. Blank lines and text after '#'
// are ignored; unknown keys are rejected.
#pragma once

#include <charconv>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>

#include "ddfuse/trainer.hpp"

namespace ddfuse {

namespace detail {

inline std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

template <class V>
V parse_number(std::string_view text, const std::string& key, const std::string& where) {
  V v{};
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (ec != std::errc() || ptr != end) {
    throw ConfigError(where + ": invalid value '" + std::string(text) + "' for key '" + key + "'");
  }
  return v;
}

}  // namespace detail

/// Applies one key/value pair to `cfg`.
inline void apply_config_value(TrainConfig& cfg, const std::string& key, std::string_view value,
                               const std::string& where = "config") {
  using detail::parse_number;
  if (key == "data") {
    cfg.dataset = std::string(value);
  } else if (key == "epochs") {
    cfg.max_epochs = parse_number<std::size_t>(value, key, where);
  } else if (key == "batch") {
    cfg.batch_size = parse_number<std::size_t>(value, key, where);
  } else if (key == "seed") {
    cfg.seed = parse_number<std::uint64_t>(value, key, where);
  } else if (key == "lr") {
    cfg.initial_lr = parse_number<double>(value, key, where);
  } else if (key == "disc_lr") {
    cfg.disc_lr = parse_number<double>(value, key, where);
  } else if (key == "lambda1") {
    cfg.weights.adversarial = parse_number<double>(value, key, where);
  } else if (key == "lambda2") {
    cfg.weights.pixel = parse_number<double>(value, key, where);
  } else if (key == "lambda3") {
    cfg.weights.ssim = parse_number<double>(value, key, where);
  } else if (key == "image_size") {
    cfg.image_size = parse_number<std::size_t>(value, key, where);
  } else if (key == "checkpoint_every") {
    cfg.checkpoint_every = parse_number<std::size_t>(value, key, where);
  } else if (key == "out") {
    cfg.out_dir = std::string(value);
  } else if (key == "checkpoint") {
    cfg.final_checkpoint = std::string(value);
  } else {
    throw ConfigError(where + ": unknown key '" + key + "'");
  }
}

inline void parse_config(TrainConfig& cfg, std::istream& in, const std::string& source = "config") {
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::string_view view(line);
    if (const auto hash = view.find('#'); hash != std::string_view::npos) view = view.substr(0, hash);
    view = detail::trim(view);
    if (view.empty()) continue;
    const std::string where = source + ":" + std::to_string(lineno);
    const auto eq = view.find('=');
    if (eq == std::string_view::npos) throw ConfigError(where + ": expected key = value");
    const std::string key(detail::trim(view.substr(0, eq)));
    const auto value = detail::trim(view.substr(eq + 1));
    if (key.empty()) throw ConfigError(where + ": empty key");
    apply_config_value(cfg, key, value, where);
  }
}

inline TrainConfig load_config(const std::filesystem::path& path, TrainConfig cfg = {}) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path.string() + ": cannot open config file");
  parse_config(cfg, in, path.string());
  return cfg;
}

}  // namespace ddfuse
