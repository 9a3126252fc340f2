#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace qgeom {

/**
 * @brief Streaming central moments up to fourth order.
 *
 * Single-pass updates and pairwise merges follow Pebay (2008). Merging is exact in arithmetic
 * but not bitwise associative, so callers that need reproducibility merge in a fixed order.
 */
struct MomentAccumulator
{
  std::uint64_t count{0};
  double mean{0.0};
  double m2{0.0};
  double m3{0.0};
  double m4{0.0};

  void push(double x)
  {
    MomentAccumulator one;
    one.count = 1;
    one.mean  = x;
    merge(one);
  }

  void merge(const MomentAccumulator & b)
  {
    if (b.count == 0) { return; }
    if (count == 0) {
      *this = b;
      return;
    }
    const double na = double(count), nb = double(b.count), n = na + nb;
    const double d  = b.mean - mean;
    const double d2 = d * d;
    const MomentAccumulator a = *this;
    count = a.count + b.count;
    mean  = a.mean + d * nb / n;
    m2    = a.m2 + b.m2 + d2 * na * nb / n;
    m3    = a.m3 + b.m3 + d2 * d * na * nb * (na - nb) / (n * n) + 3.0 * d * (na * b.m2 - nb * a.m2) / n;
    m4    = a.m4 + b.m4 + d2 * d2 * na * nb * (na * na - na * nb + nb * nb) / (n * n * n)
         + 6.0 * d2 * (na * na * b.m2 + nb * nb * a.m2) / (n * n) + 4.0 * d * (na * b.m3 - nb * a.m3) / n;
  }

  /// Unbiased sample variance.
  double variance() const { return count > 1 ? m2 / double(count - 1) : 0.0; }

  double standard_error_of_mean() const { return count > 1 ? std::sqrt(variance() / double(count)) : 0.0; }

  /// Standard error of the unbiased variance from the fourth central moment.
  double standard_error_of_variance() const
  {
    if (count < 2) { return 0.0; }
    const double n  = double(count);
    const double s2 = variance();
    const double mu4 = m4 / n;
    const double v   = (mu4 - s2 * s2 * (n - 3.0) / (n - 1.0)) / n;
    return std::sqrt(std::max(0.0, v));
  }
};

/// Fixed chunking of [0, total) so that results do not depend on the worker count.
inline constexpr std::size_t kDefaultChunk = 1024;

/**
 * @brief Evaluates fn(chunk, begin, end) over fixed-size chunks on up to `workers` threads and
 *        returns the results in chunk order.
 */
template<typename T>
std::vector<T> parallel_chunks(std::size_t total, std::size_t chunk, unsigned workers,
                               const std::function<T(std::size_t, std::size_t, std::size_t)> & fn)
{
  chunk                    = std::max<std::size_t>(chunk, 1);
  const std::size_t chunks = (total + chunk - 1) / chunk;
  std::vector<T> out(chunks);
  const auto run = [&](std::size_t c) { out[c] = fn(c, c * chunk, std::min(total, (c + 1) * chunk)); };
  workers        = std::max(1u, std::min<unsigned>(workers, unsigned(std::max<std::size_t>(chunks, 1))));
  if (workers == 1) {
    for (std::size_t c = 0; c < chunks; ++c) { run(c); }
    return out;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::thread> pool;
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t c = next++; c < chunks; c = next++) {
        try {
          run(c);
        } catch (...) {
          std::lock_guard lock(failure_mutex);
          if (!failure) { failure = std::current_exception(); }
        }
      }
    });
  }
  for (auto & t : pool) { t.join(); }
  if (failure) { std::rethrow_exception(failure); }
  return out;
}

inline unsigned default_workers() { return std::max(1u, std::thread::hardware_concurrency()); }

}  // namespace qgeom
