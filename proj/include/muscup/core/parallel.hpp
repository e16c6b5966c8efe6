#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdlib>
#include <exception>
#include <string>
#include <thread>
#include <vector>

#include "muscup/core/timing.hpp"

namespace muscup {

/// Thread count, with MUSC_UP_THREADS taking precedence over `requested`.
inline int resolve_threads(int requested) {
  if (const char* env = std::getenv("MUSC_UP_THREADS")) {
    try {
      const int t = std::stoi(env);
      if (t > 0) return t;
    } catch (const std::exception&) {
    }
  }
  return std::max(1, requested);
}

/// Static block partition of [0, n) over `threads` workers. `body(i, timing)`
/// runs for every index; each worker accumulates into its own
/// TimingBreakdown and the per-worker records are summed into `timing`
/// (busy time is summed, so t_total counts CPU-side work).
/// The exception thrown for the lowest index is rethrown.
template <class Body>
void parallel_for(std::size_t n, int threads, TimingBreakdown& timing,
                  Body&& body) {
  const auto workers =
      static_cast<std::size_t>(std::max(1, std::min<int>(threads, static_cast<int>(std::max<std::size_t>(n, 1)))));
  std::vector<TimingBreakdown> local(workers);
  std::vector<std::exception_ptr> errors(workers);
  std::vector<std::size_t> error_index(workers, n);
  auto run = [&](std::size_t w) {
    const std::size_t begin = n * w / workers, end = n * (w + 1) / workers;
    Stopwatch busy;
    for (std::size_t i = begin; i < end; ++i) {
      try {
        body(i, local[w]);
      } catch (...) {
        errors[w] = std::current_exception();
        error_index[w] = i;
        break;
      }
    }
    local[w].t_total += busy.seconds();
  };
  if (workers == 1) {
    run(0);
  } else {
    std::vector<std::thread> pool;
    pool.reserve(workers - 1);
    for (std::size_t w = 1; w < workers; ++w) pool.emplace_back(run, w);
    run(0);
    for (auto& t : pool) t.join();
  }
  for (const auto& l : local) timing += l;
  for (std::size_t w = 0; w < workers; ++w)
    if (errors[w]) std::rethrow_exception(errors[w]);
}

}  // namespace muscup
