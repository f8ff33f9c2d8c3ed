// Copyright 2026 The ddfuse Authors
// SPDX-License-Identifier: Apache-2.0
//
// Fuses an infrared/visible pair with every strategy and prints the metrics.
//
//   demo_fuse_pair ir.pgm vi.pgm [model.ddnf]

#include <cstdio>
#include <exception>

#include "ddfuse/ddfuse.hpp"

int main(int argc, char** argv) {
  if (argc < 3) {
    std::fprintf(stderr, "usage: %s ir vi [checkpoint]\n", argv[0]);
    return 2;
  }
  try {
    using namespace ddfuse;
    tune_allocator();
    const auto model = argc > 3 ? load_checkpoint<float>(argv[3]) : build_model<float>(1);
    const auto ir = load_grayscale(argv[1]).image;
    const auto vi = load_grayscale(argv[2]).image;
    std::printf("%-8s", "rule");
    for (const char* n : kMetricNames) std::printf(" %8s", n);
    std::printf("\n");
    for (const auto s : kAllStrategies) {
      const auto fused = to_image(fuse_images(model, to_tensor<float>(ir), to_tensor<float>(vi), s));
      const auto m = compute_metrics(ir, vi, fused);
      std::printf("%-8s", s.name().c_str());
      for (std::size_t i = 0; i < kMetricNames.size(); ++i) std::printf(" %8.4f", m[i]);
      std::printf("\n");
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  return 0;
}
