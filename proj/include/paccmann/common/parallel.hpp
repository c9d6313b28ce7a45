//
// paccmann-cpp: multi-modal anticancer drug sensitivity prediction.
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include <algorithm>
#include <cstdlib>
#include <functional>
#include <thread>
#include <vector>

namespace paccmann::common {

/// Thread cap honoring the PACCMANN_THREADS environment variable.
inline unsigned max_threads() {
  unsigned hw = std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("PACCMANN_THREADS")) {
    long v = std::strtol(env, nullptr, 10);
    if (v >= 1) return std::min<unsigned>(hw, static_cast<unsigned>(v));
  }
  return hw;
}

/// Static block partition of [0, n) across at most max_threads() workers.
/// fn(i) must be independent per index; results should be written to
/// preallocated slots so the outcome does not depend on scheduling.
inline void parallel_for(size_t n, const std::function<void(size_t)>& fn) {
  unsigned workers = std::min<size_t>(max_threads(), n);
  if (workers <= 1) {
    for (size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      for (size_t i = w; i < n; i += workers) fn(i);
    });
  }
  for (auto& t : pool) t.join();
}

}  // namespace paccmann::common
