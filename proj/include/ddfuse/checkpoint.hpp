// Copyright 2026 The ddfuse Authors
// SPDX-License-Identifier: Apache-2.0
//
// Binary checkpoint container. All integers and floats are little-endian.
//
//   "DDNF"                 4 bytes magic
//   version                u16 (currently 1)
//   layer_count            u32
//   layer_count times:
//     name_length          u32, then name bytes (UTF-8)
//     shape                4 x u32 (out, in, k, k)
//     weight               out*in*k*k x f32
//     bias                 out x f32
//
// Model layers come first in table order; discriminator layers ("disc.N")
// may follow in the same container.
#pragma once

#include <array>
#include <bit>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <optional>
#include <string>
#include <vector>

#include "ddfuse/discriminator.hpp"
#include "ddfuse/model.hpp"

namespace ddfuse {

inline constexpr std::array<char, 4> kCheckpointMagic{'D', 'D', 'N', 'F'};
inline constexpr std::uint16_t kCheckpointVersion = 1;

struct CheckpointLayer {
  std::string name;
  std::array<std::uint32_t, 4> shape{};
  std::vector<float> weight;
  std::vector<float> bias;
};

namespace detail {

class ByteWriter {
 public:
  void u16(std::uint16_t v) {
    bytes_.push_back(static_cast<char>(v & 0xff));
    bytes_.push_back(static_cast<char>(v >> 8));
  }
  void u32(std::uint32_t v) {
    for (int i = 0; i < 4; ++i) bytes_.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
  }
  void f32(float v) { u32(std::bit_cast<std::uint32_t>(v)); }
  void raw(std::string_view s) { bytes_.insert(bytes_.end(), s.begin(), s.end()); }
  [[nodiscard]] const std::vector<char>& bytes() const { return bytes_; }

 private:
  std::vector<char> bytes_;
};

class ByteReader {
 public:
  ByteReader(std::vector<char> bytes, std::string source)
      : bytes_(std::move(bytes)), source_(std::move(source)) {}

  std::uint16_t u16(const std::string& field) {
    need(2, field);
    const auto v = static_cast<std::uint16_t>(byte(0) | (byte(1) << 8));
    pos_ += 2;
    return v;
  }
  std::uint32_t u32(const std::string& field) {
    need(4, field);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(byte(i)) << (8 * i);
    pos_ += 4;
    return v;
  }
  float f32(const std::string& field) { return std::bit_cast<float>(u32(field)); }
  std::string raw(std::size_t n, const std::string& field) {
    need(n, field);
    std::string s(bytes_.begin() + static_cast<std::ptrdiff_t>(pos_),
                  bytes_.begin() + static_cast<std::ptrdiff_t>(pos_ + n));
    pos_ += n;
    return s;
  }
  [[nodiscard]] std::size_t remaining() const { return bytes_.size() - pos_; }

  [[noreturn]] void fail(const std::string& msg) const {
    throw FormatError(source_ + ": " + msg);
  }

 private:
  void need(std::size_t n, const std::string& field) const {
    if (remaining() < n) fail("truncated checkpoint while reading " + field);
  }
  [[nodiscard]] std::uint32_t byte(std::size_t i) const {
    return static_cast<unsigned char>(bytes_[pos_ + i]);
  }

  std::vector<char> bytes_;
  std::string source_;
  std::size_t pos_ = 0;
};

template <std::floating_point T, std::size_t N>
void append_layers(std::vector<CheckpointLayer>& out, const std::array<LayerSpec, N>& specs,
                   const std::array<ConvParams<T>, N>& layers) {
  for (std::size_t i = 0; i < N; ++i) {
    const Shape s = layers[i].weight.shape();
    CheckpointLayer l;
    l.name = std::string(specs[i].name);
    l.shape = {static_cast<std::uint32_t>(s.n), static_cast<std::uint32_t>(s.c),
               static_cast<std::uint32_t>(s.h), static_cast<std::uint32_t>(s.w)};
    for (T v : layers[i].weight.data()) l.weight.push_back(static_cast<float>(v));
    for (T v : layers[i].bias.data()) l.bias.push_back(static_cast<float>(v));
    out.push_back(std::move(l));
  }
}

template <std::floating_point T, std::size_t N>
std::array<ConvParams<T>, N> restore_layers(const std::vector<CheckpointLayer>& table,
                                            const std::array<LayerSpec, N>& specs,
                                            const std::string& source) {
  std::array<ConvParams<T>, N> layers;
  for (std::size_t i = 0; i < N; ++i) {
    const auto& spec = specs[i];
    const CheckpointLayer* found = nullptr;
    for (const auto& l : table) {
      if (l.name == spec.name) found = &l;
    }
    if (found == nullptr) {
      throw FormatError(source + ": missing layer \"" + std::string(spec.name) + "\" (" +
                        std::string(spec.block) + ")");
    }
    const std::array<std::uint32_t, 4> expected{
        static_cast<std::uint32_t>(spec.out), static_cast<std::uint32_t>(spec.in),
        static_cast<std::uint32_t>(spec.kernel), static_cast<std::uint32_t>(spec.kernel)};
    if (found->shape != expected) {
      auto fmt = [](const std::array<std::uint32_t, 4>& s) {
        return std::to_string(s[0]) + "x" + std::to_string(s[1]) + "x" + std::to_string(s[2]) +
               "x" + std::to_string(s[3]);
      };
      throw FormatError(source + ": shape mismatch in layer \"" + std::string(spec.name) +
                        "\" (" + std::string(spec.block) + "): expected " + fmt(expected) +
                        " (in " + std::to_string(spec.in) + " -> out " + std::to_string(spec.out) +
                        "), found " + fmt(found->shape));
    }
    layers[i] = ConvParams<T>::zeros(spec.in, spec.out, spec.kernel, spec.stride);
    auto w = layers[i].weight.mutable_data();
    for (std::size_t j = 0; j < w.size(); ++j) w[j] = static_cast<T>(found->weight[j]);
    auto b = layers[i].bias.mutable_data();
    for (std::size_t j = 0; j < b.size(); ++j) b[j] = static_cast<T>(found->bias[j]);
  }
  return layers;
}

inline bool is_known_layer(const std::string& name) {
  for (const auto& s : kModelLayers) {
    if (s.name == name) return true;
  }
  for (const auto& s : kDiscriminatorLayers) {
    if (s.name == name) return true;
  }
  return false;
}

}  // namespace detail

inline std::vector<char> encode_checkpoint(const std::vector<CheckpointLayer>& layers) {
  detail::ByteWriter w;
  w.raw(std::string_view(kCheckpointMagic.data(), kCheckpointMagic.size()));
  w.u16(kCheckpointVersion);
  w.u32(static_cast<std::uint32_t>(layers.size()));
  for (const auto& l : layers) {
    w.u32(static_cast<std::uint32_t>(l.name.size()));
    w.raw(l.name);
    for (auto d : l.shape) w.u32(d);
    for (float v : l.weight) w.f32(v);
    for (float v : l.bias) w.f32(v);
  }
  return w.bytes();
}

inline std::vector<CheckpointLayer> decode_checkpoint(std::vector<char> bytes, const std::string& source) {
  detail::ByteReader r(std::move(bytes), source);
  const std::string magic = r.raw(4, "magic");
  if (magic != std::string_view(kCheckpointMagic.data(), kCheckpointMagic.size())) {
    r.fail("bad magic (expected \"DDNF\")");
  }
  const std::uint16_t version = r.u16("version");
  if (version != kCheckpointVersion) {
    r.fail("unsupported version " + std::to_string(version));
  }
  const std::uint32_t count = r.u32("layer count");
  std::vector<CheckpointLayer> layers;
  for (std::uint32_t i = 0; i < count; ++i) {
    CheckpointLayer l;
    const std::string idx = "layer " + std::to_string(i);
    const std::uint32_t len = r.u32(idx + " name length");
    if (len > 256) r.fail(idx + ": implausible name length " + std::to_string(len));
    l.name = r.raw(len, idx + " name");
    if (!detail::is_known_layer(l.name)) r.fail("unknown layer name \"" + l.name + "\"");
    for (auto& d : l.shape) d = r.u32("shape of layer \"" + l.name + "\"");
    const std::uint64_t wcount = std::uint64_t{l.shape[0]} * l.shape[1] * l.shape[2] * l.shape[3];
    if (wcount * 4 > r.remaining()) r.fail("truncated checkpoint while reading weights of layer \"" + l.name + "\"");
    l.weight.resize(wcount);
    for (auto& v : l.weight) v = r.f32("weights of layer \"" + l.name + "\"");
    l.bias.resize(l.shape[0]);
    for (auto& v : l.bias) v = r.f32("bias of layer \"" + l.name + "\"");
    layers.push_back(std::move(l));
  }
  if (r.remaining() != 0) r.fail("trailing bytes after layer table");
  return layers;
}

inline std::vector<CheckpointLayer> read_checkpoint_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError(path.string() + ": cannot open checkpoint");
  std::vector<char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return decode_checkpoint(std::move(bytes), path.string());
}

template <std::floating_point T>
void save_checkpoint(const DecompositionModel<T>& model, const std::filesystem::path& path,
                     const Discriminator<T>* disc = nullptr) {
  std::vector<CheckpointLayer> table;
  detail::append_layers(table, kModelLayers, model.layers);
  if (disc != nullptr) detail::append_layers(table, kDiscriminatorLayers, disc->layers);
  const auto bytes = encode_checkpoint(table);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error(path.string() + ": cannot open for writing");
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw std::runtime_error(path.string() + ": write failed");
}

template <std::floating_point T = float>
DecompositionModel<T> load_checkpoint(const std::filesystem::path& path) {
  const auto table = read_checkpoint_file(path);
  return DecompositionModel<T>(detail::restore_layers<T>(table, kModelLayers, path.string()));
}

/// Discriminator stored alongside a model, if present.
template <std::floating_point T = float>
std::optional<Discriminator<T>> load_discriminator(const std::filesystem::path& path) {
  const auto table = read_checkpoint_file(path);
  const bool present = std::any_of(table.begin(), table.end(),
                                   [](const auto& l) { return l.name.starts_with("disc."); });
  if (!present) return std::nullopt;
  return Discriminator<T>(detail::restore_layers<T>(table, kDiscriminatorLayers, path.string()));
}

}  // namespace ddfuse
