// Copyright 2026 The ddfuse Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#if defined(__GLIBC__)
#include <malloc.h>
#endif

namespace ddfuse {

/// Keeps freed tensor buffers in the heap instead of unmapping them, so the
/// per-layer allocations of a forward pass do not pay for fresh page faults.
/// Process-wide; a no-op outside glibc.
inline void tune_allocator() {
#if defined(__GLIBC__)
  mallopt(M_MMAP_THRESHOLD, 1 << 30);
  mallopt(M_TRIM_THRESHOLD, 1 << 30);
#endif
}

}  // namespace ddfuse
