// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <functional>

namespace apdcorr {

/// Name of the environment variable that caps the number of worker threads.
inline constexpr const char* kThreadsEnv = "APDCORR_THREADS";

/// Worker count: hardware concurrency, capped by APDCORR_THREADS when set (minimum 1).
unsigned worker_count();

/// Runs body(i) for i in [0, count) on up to `workers` threads (0 selects worker_count()).
/// Iterations are split into contiguous blocks; body must only write state owned by index i.
/// The first exception thrown by any iteration is rethrown after all workers join.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body,
                  unsigned workers = 0);

}  // namespace apdcorr
