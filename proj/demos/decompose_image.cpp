// Copyright 2026 The ddfuse Authors
// SPDX-License-Identifier: Apache-2.0
//
// Decomposes one image with a checkpoint (or a freshly seeded model) and
// prints per-band statistics.
//
//   demo_decompose_image image.pgm [model.ddnf]

#include <cmath>
#include <cstdio>
#include <exception>

#include "ddfuse/ddfuse.hpp"

namespace {

void describe(const char* name, const ddfuse::Tensor& t) {
  double lo = 1e30, hi = -1e30, sum = 0.0;
  for (float v : t.data()) {
    lo = std::min(lo, static_cast<double>(v));
    hi = std::max(hi, static_cast<double>(v));
    sum += std::abs(v);
  }
  std::printf("%-4s min %+.4f  max %+.4f  mean|v| %.4f\n", name, lo, hi, sum / static_cast<double>(t.numel()));
}

}  // namespace

int main(int argc, char** argv) {
  if (argc < 2) {
    std::fprintf(stderr, "usage: %s image [checkpoint]\n", argv[0]);
    return 2;
  }
  try {
    using namespace ddfuse;
    tune_allocator();
    const auto model = argc > 2 ? load_checkpoint<float>(argv[2]) : build_model<float>(1);
    const auto img = to_tensor<float>(load_grayscale(argv[1]).image);
    const auto d = forward(model, img);
    describe("g1", d.g1);
    describe("g2", d.g2);
    describe("g3", d.g3);
    describe("s", d.s);
    describe("re", d.re);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  return 0;
}
