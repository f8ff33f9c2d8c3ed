// Copyright 2026 The ddfuse Authors
// SPDX-License-Identifier: Apache-2.0
//
// Objective fusion-quality metrics. Intensities are scaled to 0..255.
//
//   EN   Shannon entropy (bits) of the 256-bin histogram of quantized pixels
//   SD   population standard deviation
//   SF   sqrt(RF^2 + CF^2), RF/CF the mean squared horizontal/vertical first
//        differences over all valid pixel pairs
//   AG   mean over 2x2 cells of sqrt((dx^2 + dy^2) / 2)
//   DF   sqrt(mean over 2x2 cells of (dx^2 + dy^2))
//   EI   mean Sobel gradient magnitude over the interior (no padding)
//   MI   I(ir; fused) + I(vi; fused) from joint 256x256 histograms (bits)
//   SCD  corr(fused - ir, vi) + corr(fused - vi, ir), corr := 0 when a
//        variance vanishes
//
// AG and DF use cell differences (the average of the two parallel pixel
// differences in each 2x2 cell), which keeps them invariant under flips.
#pragma once

#include <array>
#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

#include "ddfuse/image_io.hpp"

namespace ddfuse {

namespace detail {

inline void require_size(const GrayImage& img, std::size_t min, const char* metric) {
  if (img.width < min || img.height < min) {
    throw ContractError(std::string(metric) + ": image must be at least " + std::to_string(min) + "x" +
                        std::to_string(min) + ", got " + std::to_string(img.width) + "x" +
                        std::to_string(img.height));
  }
}

inline void require_same_dims(const GrayImage& a, const GrayImage& b, const char* metric) {
  if (a.width != b.width || a.height != b.height) {
    throw ShapeError(std::string(metric) + ": image sizes differ (" + std::to_string(a.width) + "x" +
                     std::to_string(a.height) + " vs " + std::to_string(b.width) + "x" +
                     std::to_string(b.height) + ")");
  }
}

inline double entropy_of(const std::vector<double>& counts, double total) {
  double h = 0.0;
  for (double c : counts) {
    if (c > 0.0) {
      const double p = c / total;
      h -= p * std::log2(p);
    }
  }
  return h;
}

inline std::vector<double> histogram(const GrayImage& img) {
  std::vector<double> counts(256, 0.0);
  for (float v : img.pixels) counts[quantize_u8(v)] += 1.0;
  return counts;
}

inline double joint_entropy(const GrayImage& a, const GrayImage& b) {
  std::vector<double> counts(256 * 256, 0.0);
  for (std::size_t i = 0; i < a.pixels.size(); ++i) {
    counts[std::size_t{quantize_u8(a.pixels[i])} * 256 + quantize_u8(b.pixels[i])] += 1.0;
  }
  return entropy_of(counts, static_cast<double>(a.pixels.size()));
}

inline double scaled(const GrayImage& img, std::size_t y, std::size_t x) {
  return 255.0 * static_cast<double>(img.at(y, x));
}

inline double pearson(const std::vector<double>& a, const std::vector<double>& b) {
  const auto n = static_cast<double>(a.size());
  double ma = 0.0, mb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ma += a[i];
    mb += b[i];
  }
  ma /= n;
  mb /= n;
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double da = a[i] - ma, db = b[i] - mb;
    sab += da * db;
    saa += da * da;
    sbb += db * db;
  }
  if (saa <= 0.0 || sbb <= 0.0) return 0.0;
  return sab / std::sqrt(saa * sbb);
}

/// Cell gradients (dx, dy) of the 2x2 block with top-left corner (y, x).
inline std::pair<double, double> cell_gradient(const GrayImage& img, std::size_t y, std::size_t x) {
  const double a = scaled(img, y, x), b = scaled(img, y, x + 1);
  const double c = scaled(img, y + 1, x), d = scaled(img, y + 1, x + 1);
  return {((b - a) + (d - c)) * 0.5, ((c - a) + (d - b)) * 0.5};
}

}  // namespace detail

inline double entropy(const GrayImage& img) {
  if (img.empty()) throw ContractError("entropy: empty image");
  return detail::entropy_of(detail::histogram(img), static_cast<double>(img.pixels.size()));
}

inline double std_dev(const GrayImage& img) {
  detail::require_size(img, 1, "SD");
  double m = 0.0;
  for (float v : img.pixels) m += 255.0 * v;
  m /= static_cast<double>(img.pixels.size());
  double s = 0.0;
  for (float v : img.pixels) s += (255.0 * v - m) * (255.0 * v - m);
  return std::sqrt(s / static_cast<double>(img.pixels.size()));
}

inline double spatial_frequency(const GrayImage& img) {
  detail::require_size(img, 2, "SF");
  double rf = 0.0, cf = 0.0;
  for (std::size_t y = 0; y < img.height; ++y) {
    for (std::size_t x = 1; x < img.width; ++x) {
      const double d = detail::scaled(img, y, x) - detail::scaled(img, y, x - 1);
      rf += d * d;
    }
  }
  for (std::size_t y = 1; y < img.height; ++y) {
    for (std::size_t x = 0; x < img.width; ++x) {
      const double d = detail::scaled(img, y, x) - detail::scaled(img, y - 1, x);
      cf += d * d;
    }
  }
  rf /= static_cast<double>(img.height * (img.width - 1));
  cf /= static_cast<double>((img.height - 1) * img.width);
  return std::sqrt(rf + cf);
}

inline double avg_gradient(const GrayImage& img) {
  detail::require_size(img, 2, "AG");
  double acc = 0.0;
  for (std::size_t y = 0; y + 1 < img.height; ++y) {
    for (std::size_t x = 0; x + 1 < img.width; ++x) {
      const auto [dx, dy] = detail::cell_gradient(img, y, x);
      acc += std::sqrt((dx * dx + dy * dy) / 2.0);
    }
  }
  return acc / static_cast<double>((img.height - 1) * (img.width - 1));
}

inline double definition(const GrayImage& img) {
  detail::require_size(img, 2, "DF");
  double acc = 0.0;
  for (std::size_t y = 0; y + 1 < img.height; ++y) {
    for (std::size_t x = 0; x + 1 < img.width; ++x) {
      const auto [dx, dy] = detail::cell_gradient(img, y, x);
      acc += dx * dx + dy * dy;
    }
  }
  return std::sqrt(acc / static_cast<double>((img.height - 1) * (img.width - 1)));
}

inline double edge_intensity(const GrayImage& img) {
  detail::require_size(img, 3, "EI");
  double acc = 0.0;
  for (std::size_t y = 1; y + 1 < img.height; ++y) {
    for (std::size_t x = 1; x + 1 < img.width; ++x) {
      auto f = [&](std::size_t yy, std::size_t xx) { return detail::scaled(img, yy, xx); };
      const double gx = (f(y - 1, x + 1) + 2 * f(y, x + 1) + f(y + 1, x + 1)) -
                        (f(y - 1, x - 1) + 2 * f(y, x - 1) + f(y + 1, x - 1));
      const double gy = (f(y + 1, x - 1) + 2 * f(y + 1, x) + f(y + 1, x + 1)) -
                        (f(y - 1, x - 1) + 2 * f(y - 1, x) + f(y - 1, x + 1));
      acc += std::sqrt(gx * gx + gy * gy);
    }
  }
  return acc / static_cast<double>((img.height - 2) * (img.width - 2));
}

/// I(a; b) = H(a) + H(b) - H(a, b), in bits.
inline double mutual_information(const GrayImage& a, const GrayImage& b) {
  detail::require_same_dims(a, b, "MI");
  if (a.empty()) throw ContractError("MI: empty image");
  return entropy(a) + entropy(b) - detail::joint_entropy(a, b);
}

inline double mutual_information(const GrayImage& ir, const GrayImage& vi, const GrayImage& fused) {
  return mutual_information(ir, fused) + mutual_information(vi, fused);
}

inline double scd(const GrayImage& ir, const GrayImage& vi, const GrayImage& fused) {
  detail::require_same_dims(ir, vi, "SCD");
  detail::require_same_dims(ir, fused, "SCD");
  if (ir.pixels.size() < 2) throw ContractError("SCD: need at least two pixels");
  const std::size_t n = ir.pixels.size();
  std::vector<double> d1(n), d2(n), a(n), b(n);
  for (std::size_t i = 0; i < n; ++i) {
    d1[i] = static_cast<double>(fused.pixels[i]) - ir.pixels[i];
    d2[i] = static_cast<double>(fused.pixels[i]) - vi.pixels[i];
    a[i] = vi.pixels[i];
    b[i] = ir.pixels[i];
  }
  return detail::pearson(d1, a) + detail::pearson(d2, b);
}

inline constexpr std::array<const char*, 8> kMetricNames{"EN", "SD", "SF", "AG", "EI", "DF", "MI", "SCD"};

struct MetricValues {
  std::array<double, 8> values{};  // in kMetricNames order

  [[nodiscard]] double operator[](std::size_t i) const { return values[i]; }
  double& operator[](std::size_t i) { return values[i]; }
  [[nodiscard]] bool all_finite() const {
    for (double v : values) {
      if (!std::isfinite(v)) return false;
    }
    return true;
  }
};

inline MetricValues compute_metrics(const GrayImage& ir, const GrayImage& vi, const GrayImage& fused) {
  detail::require_same_dims(ir, vi, "metrics");
  detail::require_same_dims(ir, fused, "metrics");
  MetricValues m;
  m.values = {entropy(fused),        std_dev(fused),    spatial_frequency(fused),
              avg_gradient(fused),   edge_intensity(fused), definition(fused),
              mutual_information(ir, vi, fused), scd(ir, vi, fused)};
  return m;
}

struct FusionTriple {
  std::string name;
  GrayImage ir;
  GrayImage vi;
  GrayImage fused;
};

struct MetricReport {
  std::vector<std::string> names;
  std::vector<MetricValues> rows;
  MetricValues mean;

  /// Header, one row per pair, then the mean row; four decimals.
  [[nodiscard]] std::string to_csv() const {
    std::string out = "pair";
    for (const char* n : kMetricNames) out += std::string(",") + n;
    out += '\n';
    auto emit = [&out](const std::string& label, const MetricValues& m) {
      out += label;
      char buf[64];
      for (double v : m.values) {
        std::snprintf(buf, sizeof buf, ",%.4f", v);
        out += buf;
      }
      out += '\n';
    };
    for (std::size_t i = 0; i < rows.size(); ++i) emit(names[i], rows[i]);
    emit("mean", mean);
    return out;
  }
};

inline MetricReport report(const std::vector<FusionTriple>& triples) {
  if (triples.empty()) throw ContractError("report: no image triples");
  MetricReport r;
  for (const auto& t : triples) {
    r.names.push_back(t.name);
    r.rows.push_back(compute_metrics(t.ir, t.vi, t.fused));
  }
  for (std::size_t k = 0; k < kMetricNames.size(); ++k) {
    double acc = 0.0;
    for (const auto& row : r.rows) acc += row[k];
    r.mean[k] = acc / static_cast<double>(r.rows.size());
  }
  return r;
}

}  // namespace ddfuse
