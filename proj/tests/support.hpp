// Copyright 2026 The ddfuse Authors
// SPDX-License-Identifier: Apache-2.0
//
// Small helpers shared by the unit tests and the acceptance binary.
#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <string>
#include <vector>

#include "ddfuse/ddfuse.hpp"

namespace ddfuse::testing {

using TensorD = BasicTensor<double>;

template <std::floating_point T = float>
BasicTensor<T> random_tensor(Shape s, std::uint64_t seed, double lo = -1.0, double hi = 1.0,
                             bool requires_grad = false) {
  Rng rng(seed, 0x74657374ULL);
  std::vector<T> v(s.numel());
  for (auto& x : v) x = static_cast<T>(rng.uniform(lo, hi));
  return BasicTensor<T>::from_vector(s, std::move(v), requires_grad);
}

/// Like random_tensor, but every value keeps at least `gap` away from zero.
template <std::floating_point T = float>
BasicTensor<T> random_away_from_zero(Shape s, std::uint64_t seed, double gap, bool requires_grad = false) {
  Rng rng(seed, 0x6e7a6572ULL);
  std::vector<T> v(s.numel());
  for (auto& x : v) {
    const double m = rng.uniform(gap, 1.0);
    x = static_cast<T>(rng.uniform() < 0.5 ? -m : m);
  }
  return BasicTensor<T>::from_vector(s, std::move(v), requires_grad);
}

inline GrayImage random_image(std::size_t w, std::size_t h, std::uint64_t seed) {
  Rng rng(seed, 0x696d67ULL);
  GrayImage img(w, h);
  for (auto& p : img.pixels) p = static_cast<float>(rng.uniform());
  return img;
}

/// Image whose values are exact multiples of 1/255, so it survives a save/load round trip.
inline GrayImage random_quantized_image(std::size_t w, std::size_t h, std::uint64_t seed) {
  Rng rng(seed, 0x717561ULL);
  GrayImage img(w, h);
  for (auto& p : img.pixels) p = static_cast<float>(static_cast<double>(rng.below(256)) / 255.0);
  return img;
}

template <std::floating_point T>
std::vector<T> values(const BasicTensor<T>& t) {
  return {t.data().begin(), t.data().end()};
}

inline std::vector<char> read_bytes(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline std::string read_text(const std::filesystem::path& p) {
  std::ifstream in(p);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

/// Fresh, empty directory below the system temp dir.
inline std::filesystem::path fresh_dir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / ("ddfuse_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace ddfuse::testing
