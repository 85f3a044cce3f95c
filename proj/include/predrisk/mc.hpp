#pragma once

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <cstdlib>
#include <exception>
#include <functional>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include "predrisk/errors.hpp"
#include "predrisk/rng.hpp"
#include "predrisk/stats.hpp"

namespace predrisk {

// Number of worker threads used by run_replicates. Defaults to the hardware
// concurrency, capped by the PREDRISK_THREADS environment variable when set.
inline unsigned mc_thread_count() {
  unsigned hw = std::thread::hardware_concurrency();
  if (hw == 0) hw = 1;
  if (const char* env = std::getenv("PREDRISK_THREADS")) {
    char* end = nullptr;
    long v = std::strtol(env, &end, 10);
    if (end != env && v >= 1 && v <= 4096) hw = static_cast<unsigned>(v);
  }
  return hw;
}

// Runs `count` independent replicates, each seeded by (master_seed, index),
// and collects the results into index order. Replicate i always sees the same
// RngStream regardless of thread count, and reductions downstream consume the
// vector in index order, so results are bit-identical for any PREDRISK_THREADS.
template <typename T>
std::vector<T> run_replicates(std::uint64_t master_seed, std::int64_t count,
                              const std::function<T(RngStream&)>& body) {
  if (count < 1) throw ValidationError("run_replicates: count must be >= 1");
  std::vector<T> out(static_cast<std::size_t>(count));
  const unsigned workers =
      std::min<unsigned>(mc_thread_count(), static_cast<unsigned>(count));
  if (workers <= 1) {
    for (std::int64_t i = 0; i < count; ++i) {
      RngStream rng(master_seed, static_cast<std::uint64_t>(i));
      out[static_cast<std::size_t>(i)] = body(rng);
    }
    return out;
  }
  std::atomic<std::int64_t> next{0};
  std::atomic<bool> failed{false};
  std::exception_ptr error;
  std::mutex error_mutex;
  const std::int64_t chunk = std::max<std::int64_t>(1, count / (8 * workers));
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      try {
        while (!failed.load(std::memory_order_relaxed)) {
          const std::int64_t begin = next.fetch_add(chunk);
          if (begin >= count) return;
          const std::int64_t end = std::min(begin + chunk, count);
          for (std::int64_t i = begin; i < end; ++i) {
            RngStream rng(master_seed, static_cast<std::uint64_t>(i));
            out[static_cast<std::size_t>(i)] = body(rng);
          }
        }
      } catch (...) {
        std::scoped_lock lock(error_mutex);
        if (!failed.exchange(true)) error = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  if (failed && error) std::rethrow_exception(error);
  return out;
}

// Convenience reduction: replicate body returns one double, result is its
// mean with a Monte Carlo standard error.
inline MeanVar run_replicates_mean(std::uint64_t master_seed, std::int64_t count,
                                   const std::function<double(RngStream&)>& body) {
  const std::vector<double> vals = run_replicates<double>(master_seed, count, body);
  return mean_var(vals);
}

}  // namespace predrisk
