// Copyright 2026 The ddfuse Authors
// SPDX-License-Identifier: Apache-2.0
//
// Grayscale image files (binary PGM, 8-bit PNG), bilinear resizing and
// seeded dataset iteration.
#pragma once

#include <png.h>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <iterator>
#include <optional>
#include <string>
#include <vector>

#include "ddfuse/errors.hpp"
#include "ddfuse/random.hpp"
#include "ddfuse/tensor.hpp"

namespace ddfuse {

/// Row-major single-channel image. Values are nominally in [0, 1].
struct GrayImage {
  std::size_t width = 0;
  std::size_t height = 0;
  std::vector<float> pixels;

  GrayImage() = default;
  GrayImage(std::size_t w, std::size_t h, float fill = 0.0f) : width(w), height(h), pixels(w * h, fill) {}
  GrayImage(std::size_t w, std::size_t h, std::vector<float> values)
      : width(w), height(h), pixels(std::move(values)) {
    if (pixels.size() != w * h) throw ShapeError("GrayImage: pixel count does not match dimensions");
  }

  [[nodiscard]] float at(std::size_t y, std::size_t x) const { return pixels[y * width + x]; }
  float& at(std::size_t y, std::size_t x) { return pixels[y * width + x]; }
  [[nodiscard]] bool empty() const { return pixels.empty(); }

  friend bool operator==(const GrayImage&, const GrayImage&) = default;
};

struct ImageFile {
  std::filesystem::path path;
  GrayImage image;
  std::size_t original_width = 0;
  std::size_t original_height = 0;
};

/// Shared 8-bit quantizer: floor(clamp(v, 0, 1) * 255 + 0.5).
inline std::uint8_t quantize_u8(double v) {
  if (!(v > 0.0)) return 0;  // also maps NaN to 0
  if (v >= 1.0) return 255;
  return static_cast<std::uint8_t>(std::floor(v * 255.0 + 0.5));
}

namespace detail {

inline std::vector<unsigned char> read_file_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError(path.string() + ": cannot open file");
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline float luma(double r, double g, double b) {
  return static_cast<float>((0.299 * r + 0.587 * g + 0.114 * b) / 255.0);
}

inline GrayImage decode_pgm(const std::vector<unsigned char>& bytes, const std::string& source) {
  std::size_t pos = 2;
  auto fail = [&](const std::string& msg) -> FormatError { return FormatError(source + ": " + msg); };
  auto next_int = [&](const char* field) -> std::size_t {
    for (;;) {
      while (pos < bytes.size() && std::isspace(bytes[pos])) ++pos;
      if (pos < bytes.size() && bytes[pos] == '#') {
        while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
        continue;
      }
      break;
    }
    if (pos >= bytes.size() || !std::isdigit(bytes[pos])) throw fail(std::string("malformed PGM header (") + field + ")");
    std::size_t v = 0;
    while (pos < bytes.size() && std::isdigit(bytes[pos])) {
      v = v * 10 + static_cast<std::size_t>(bytes[pos] - '0');
      if (v > (std::size_t{1} << 20)) throw fail(std::string("PGM ") + field + " out of range");
      ++pos;
    }
    return v;
  };
  const std::size_t w = next_int("width");
  const std::size_t h = next_int("height");
  const std::size_t maxval = next_int("maxval");
  if (w == 0 || h == 0) throw fail("PGM has zero size");
  if (maxval == 0 || maxval > 255) throw fail("only 8-bit PGM (maxval <= 255) is supported");
  if (pos >= bytes.size() || !std::isspace(bytes[pos])) throw fail("malformed PGM header");
  ++pos;
  if (bytes.size() - pos < w * h) throw fail("truncated PGM pixel data");
  GrayImage img(w, h);
  for (std::size_t i = 0; i < w * h; ++i) {
    img.pixels[i] = static_cast<float>(static_cast<double>(bytes[pos + i]) / static_cast<double>(maxval));
  }
  return img;
}

inline GrayImage decode_png(const std::vector<unsigned char>& bytes, const std::string& source) {
  png_image png{};
  png.version = PNG_IMAGE_VERSION;
  if (png_image_begin_read_from_memory(&png, bytes.data(), bytes.size()) == 0) {
    throw FormatError(source + ": " + png.message);
  }
  if ((png.format & PNG_FORMAT_FLAG_LINEAR) != 0) {
    png_image_free(&png);
    throw FormatError(source + ": only 8-bit PNG is supported");
  }
  const bool color = (png.format & PNG_FORMAT_FLAG_COLOR) != 0;
  const bool alpha = (png.format & PNG_FORMAT_FLAG_ALPHA) != 0;
  png.format = color ? (alpha ? PNG_FORMAT_RGBA : PNG_FORMAT_RGB) : (alpha ? PNG_FORMAT_GA : PNG_FORMAT_GRAY);
  const std::size_t channels = PNG_IMAGE_PIXEL_CHANNELS(png.format);
  std::vector<unsigned char> buf(PNG_IMAGE_SIZE(png));
  if (png_image_finish_read(&png, nullptr, buf.data(), 0, nullptr) == 0) {
    const std::string msg = png.message;
    png_image_free(&png);
    throw FormatError(source + ": " + msg);
  }
  GrayImage img(png.width, png.height);
  for (std::size_t i = 0; i < img.pixels.size(); ++i) {
    const unsigned char* p = buf.data() + i * channels;
    img.pixels[i] = color ? luma(p[0], p[1], p[2]) : static_cast<float>(p[0] / 255.0);
  }
  return img;
}

inline bool has_png_extension(const std::filesystem::path& path) {
  std::string ext = path.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
  return ext == ".png";
}

}  // namespace detail

/// Decodes binary PGM (P5, maxval <= 255) or 8-bit PNG. Colour is reduced with
/// luma weights 0.299/0.587/0.114; values are scaled to [0, 1].
inline ImageFile load_grayscale(const std::filesystem::path& path) {
  const auto bytes = detail::read_file_bytes(path);
  ImageFile file;
  file.path = path;
  static constexpr unsigned char kPngSig[8] = {0x89, 'P', 'N', 'G', '\r', '\n', 0x1a, '\n'};
  if (bytes.size() >= 2 && bytes[0] == 'P' && bytes[1] == '5') {
    file.image = detail::decode_pgm(bytes, path.string());
  } else if (bytes.size() >= 8 && std::equal(kPngSig, kPngSig + 8, bytes.begin())) {
    file.image = detail::decode_png(bytes, path.string());
  } else {
    throw FormatError(path.string() + ": unsupported image format (expected P5 PGM or PNG)");
  }
  file.original_width = file.image.width;
  file.original_height = file.image.height;
  return file;
}

/// Bilinear resampling with half-pixel centres and edge clamping.
inline GrayImage resize_bilinear(const GrayImage& src, std::size_t width, std::size_t height) {
  if (src.empty()) throw ContractError("resize_bilinear: empty source image");
  if (width == src.width && height == src.height) return src;
  GrayImage out(width, height);
  const double sx = static_cast<double>(src.width) / static_cast<double>(width);
  const double sy = static_cast<double>(src.height) / static_cast<double>(height);
  const double max_x = static_cast<double>(src.width - 1);
  const double max_y = static_cast<double>(src.height - 1);
  for (std::size_t y = 0; y < height; ++y) {
    const double fy = std::clamp((static_cast<double>(y) + 0.5) * sy - 0.5, 0.0, max_y);
    const auto y0 = static_cast<std::size_t>(fy);
    const std::size_t y1 = std::min(y0 + 1, src.height - 1);
    const double ty = fy - static_cast<double>(y0);
    for (std::size_t x = 0; x < width; ++x) {
      const double fx = std::clamp((static_cast<double>(x) + 0.5) * sx - 0.5, 0.0, max_x);
      const auto x0 = static_cast<std::size_t>(fx);
      const std::size_t x1 = std::min(x0 + 1, src.width - 1);
      const double tx = fx - static_cast<double>(x0);
      const double top = src.at(y0, x0) * (1.0 - tx) + src.at(y0, x1) * tx;
      const double bot = src.at(y1, x0) * (1.0 - tx) + src.at(y1, x1) * tx;
      out.at(y, x) = static_cast<float>(std::clamp(top * (1.0 - ty) + bot * ty, 0.0, 1.0));
    }
  }
  return out;
}

/// Writes an 8-bit image: PNG when the extension is .png, binary PGM otherwise.
/// Values are clamped to [0, 1] before quantization.
inline void save_image(const GrayImage& img, const std::filesystem::path& path) {
  std::vector<unsigned char> px(img.pixels.size());
  for (std::size_t i = 0; i < px.size(); ++i) px[i] = quantize_u8(img.pixels[i]);
  if (detail::has_png_extension(path)) {
    png_image png{};
    png.version = PNG_IMAGE_VERSION;
    png.width = static_cast<png_uint_32>(img.width);
    png.height = static_cast<png_uint_32>(img.height);
    png.format = PNG_FORMAT_GRAY;
    if (png_image_write_to_file(&png, path.string().c_str(), 0, px.data(), 0, nullptr) == 0) {
      throw std::runtime_error(path.string() + ": " + png.message);
    }
    return;
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error(path.string() + ": cannot open for writing");
  out << "P5\n" << img.width << ' ' << img.height << "\n255\n";
  out.write(reinterpret_cast<const char*>(px.data()), static_cast<std::streamsize>(px.size()));
  if (!out) throw std::runtime_error(path.string() + ": write failed");
}

template <std::floating_point T = float>
BasicTensor<T> to_tensor(const GrayImage& img) {
  return BasicTensor<T>::from_vector({1, 1, img.height, img.width},
                                     std::vector<T>(img.pixels.begin(), img.pixels.end()));
}

/// Image `index` of a single-channel batch.
template <std::floating_point T>
GrayImage to_image(const BasicTensor<T>& t, std::size_t index = 0) {
  const Shape s = t.shape();
  if (s.c != 1) throw ShapeError("to_image: expected a single-channel tensor, got " + s.str());
  if (index >= s.n) throw ShapeError("to_image: batch index out of range");
  const auto d = t.data();
  GrayImage img(s.w, s.h);
  for (std::size_t i = 0; i < s.plane(); ++i) img.pixels[i] = static_cast<float>(d[index * s.plane() + i]);
  return img;
}

template <std::floating_point T>
void save_image(const BasicTensor<T>& t, const std::filesystem::path& path) {
  if (t.shape().n != 1) throw ShapeError("save_image: expected a single image, got " + t.shape().str());
  save_image(to_image(t), path);
}

/// Image files (.pgm / .png) directly inside `dir`, sorted by name.
inline std::vector<std::filesystem::path> list_images(const std::filesystem::path& dir) {
  std::vector<std::filesystem::path> files;
  for (const auto& e : std::filesystem::directory_iterator(dir)) {
    if (!e.is_regular_file()) continue;
    std::string ext = e.path().extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
    if (ext == ".pgm" || ext == ".png") files.push_back(e.path());
  }
  std::sort(files.begin(), files.end());
  return files;
}

/// Seeded, exhaustive per-epoch iteration over a fixed image list. Each image
/// is decoded and resized to image_size x image_size once, then cached.
class DatasetIterator {
 public:
  using Warn = std::function<void(const std::string&)>;

  DatasetIterator(std::vector<std::filesystem::path> files, std::uint64_t seed, std::size_t batch_size,
                  std::size_t image_size, Warn warn = default_warn())
      : seed_(seed), batch_size_(batch_size), image_size_(image_size), warn_(std::move(warn)) {
    check();
    for (auto& f : files) sources_.push_back({std::move(f), std::nullopt, false});
    if (sources_.empty()) throw ContractError("DatasetIterator: empty file list");
  }

  DatasetIterator(std::vector<GrayImage> images, std::uint64_t seed, std::size_t batch_size,
                  std::size_t image_size)
      : seed_(seed), batch_size_(batch_size), image_size_(image_size), warn_(default_warn()) {
    check();
    for (auto& img : images) {
      sources_.push_back({{}, resize_bilinear(img, image_size, image_size), false});
    }
    if (sources_.empty()) throw ContractError("DatasetIterator: empty image list");
  }

  [[nodiscard]] std::size_t size() const { return sources_.size(); }
  [[nodiscard]] std::size_t batch_size() const { return batch_size_; }
  [[nodiscard]] std::size_t image_size() const { return image_size_; }
  [[nodiscard]] std::size_t batches_per_epoch() const { return (size() + batch_size_ - 1) / batch_size_; }
  /// Number of files that failed to decode so far.
  [[nodiscard]] std::size_t skipped() const { return skipped_; }

  /// Visit order for `epoch`, a pure function of (seed, epoch).
  [[nodiscard]] std::vector<std::size_t> epoch_order(std::size_t epoch) const {
    Rng rng(seed_, 0x7368756666000000ULL + epoch);
    return rng.permutation(size());
  }

  /// Calls fn(batch) for each (b, 1, S, S) batch of the epoch; the last one may be short.
  template <std::floating_point T, class Fn>
  void for_each_batch(std::size_t epoch, Fn&& fn) {
    const auto order = epoch_order(epoch);
    for (std::size_t start = 0; start < order.size(); start += batch_size_) {
      const std::size_t end = std::min(order.size(), start + batch_size_);
      std::vector<T> values;
      std::size_t count = 0;
      for (std::size_t i = start; i < end; ++i) {
        const GrayImage* img = fetch(order[i]);
        if (img == nullptr) continue;
        values.insert(values.end(), img->pixels.begin(), img->pixels.end());
        ++count;
      }
      if (count == 0) continue;
      fn(BasicTensor<T>::from_vector({count, 1, image_size_, image_size_}, std::move(values)));
    }
  }

  template <std::floating_point T = float>
  std::vector<BasicTensor<T>> batches(std::size_t epoch) {
    std::vector<BasicTensor<T>> out;
    for_each_batch<T>(epoch, [&](BasicTensor<T> b) { out.push_back(std::move(b)); });
    return out;
  }

 private:
  struct Source {
    std::filesystem::path path;
    std::optional<GrayImage> decoded;
    bool failed;
  };

  static Warn default_warn() {
    return [](const std::string& msg) { std::cerr << "warning: " << msg << '\n'; };
  }

  void check() const {
    if (batch_size_ == 0) throw ContractError("DatasetIterator: batch size must be >= 1");
    if (image_size_ == 0) throw ContractError("DatasetIterator: image size must be >= 1");
  }

  const GrayImage* fetch(std::size_t i) {
    Source& s = sources_[i];
    if (s.decoded) return &*s.decoded;
    if (s.failed) return nullptr;
    try {
      s.decoded = resize_bilinear(load_grayscale(s.path).image, image_size_, image_size_);
      return &*s.decoded;
    } catch (const std::exception& e) {
      s.failed = true;
      ++skipped_;
      if (warn_) warn_("skipping " + s.path.string() + ": " + e.what());
      return nullptr;
    }
  }

  std::vector<Source> sources_;
  std::uint64_t seed_;
  std::size_t batch_size_;
  std::size_t image_size_;
  Warn warn_;
  std::size_t skipped_ = 0;
};

}  // namespace ddfuse
