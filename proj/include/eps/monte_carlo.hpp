#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

#include "eps/errors.hpp"
#include "eps/numerics.hpp"

namespace eps {

struct McConfig {
  std::size_t n_paths = 1'000'000;
  std::uint64_t seed = 20240917;
  std::size_t partitions = 64;
  unsigned workers = 0;  // 0 = hardware concurrency
  bool antithetic = false;
};

struct McEstimate {
  double value = 0.0;
  double std_error = 0.0;
  std::size_t n_paths = 0;
};

// Welford accumulator; merge() is Chan's pairwise update.
struct RunningStats {
  std::size_t count = 0;
  double mean = 0.0;
  double m2 = 0.0;

  void add(double x) noexcept {
    ++count;
    const double delta = x - mean;
    mean += delta / static_cast<double>(count);
    m2 += delta * (x - mean);
  }

  void merge(const RunningStats& o) noexcept {
    if (o.count == 0) return;
    if (count == 0) {
      *this = o;
      return;
    }
    const double n = static_cast<double>(count + o.count);
    const double delta = o.mean - mean;
    mean += delta * static_cast<double>(o.count) / n;
    m2 += o.m2 + delta * delta * static_cast<double>(count) * static_cast<double>(o.count) / n;
    count += o.count;
  }

  double variance() const noexcept {
    return count > 1 ? std::max(0.0, m2 / static_cast<double>(count - 1)) : 0.0;
  }

  McEstimate estimate(std::size_t paths) const noexcept {
    return {mean, count > 0 ? std::sqrt(variance() / static_cast<double>(count)) : 0.0, paths};
  }
};

struct PartitionRange {
  std::size_t index;
  std::size_t first;
  std::size_t count;
  GaussianStream stream;
};

inline unsigned resolve_workers(unsigned requested) {
  if (requested > 0) return requested;
  return std::max(1u, std::thread::hardware_concurrency());
}

// Runs fn(PartitionRange) once per partition and returns the results in
// partition order. Partition p always reads substream p, so the output does
// not depend on the worker count.
template <class Fn>
auto run_partitions(std::size_t n_items, std::uint64_t seed, std::size_t partitions, unsigned workers,
                    Fn&& fn) {
  using Result = decltype(fn(PartitionRange{}));
  require(partitions >= 1, "partition count must be at least one");
  partitions = std::min(partitions, std::max<std::size_t>(n_items, 1));

  std::vector<PartitionRange> ranges;
  ranges.reserve(partitions);
  const std::size_t base = n_items / partitions;
  const std::size_t extra = n_items % partitions;
  std::size_t first = 0;
  for (std::size_t p = 0; p < partitions; ++p) {
    const std::size_t count = base + (p < extra ? 1 : 0);
    ranges.push_back({p, first, count, GaussianStream{seed, p}});
    first += count;
  }

  std::vector<Result> results(partitions);
  const unsigned n_workers =
      static_cast<unsigned>(std::min<std::size_t>(resolve_workers(workers), partitions));
  if (n_workers <= 1) {
    for (std::size_t p = 0; p < partitions; ++p) results[p] = fn(ranges[p]);
    return results;
  }

  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    for (std::size_t p = next++; p < partitions; p = next++) {
      try {
        results[p] = fn(ranges[p]);
      } catch (...) {
        const std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  std::vector<std::jthread> pool;
  pool.reserve(n_workers);
  for (unsigned i = 0; i < n_workers; ++i) pool.emplace_back(worker);
  pool.clear();  // joins
  if (failure) std::rethrow_exception(failure);
  return results;
}

// Mean and standard error of payoff(z) over n_paths triples of normals.
// With antithetic sampling each sample is the average over (z, -z) and
// n_paths counts pairs.
template <class Payoff>
McEstimate mc_expectation(const McConfig& cfg, Payoff&& payoff) {
  require(cfg.n_paths >= 1, "need at least one path");
  const auto parts = run_partitions(cfg.n_paths, cfg.seed, cfg.partitions, cfg.workers,
                                    [&](const PartitionRange& r) {
                                      RunningStats s;
                                      GaussianCursor cursor(r.stream);
                                      for (std::size_t i = 0; i < r.count; ++i) {
                                        std::array<double, 3> z;
                                        z[0] = cursor.next();
                                        z[1] = cursor.next();
                                        z[2] = cursor.next();
                                        if (cfg.antithetic) {
                                          const std::array<double, 3> mz{-z[0], -z[1], -z[2]};
                                          s.add(0.5 * (payoff(z) + payoff(mz)));
                                        } else {
                                          s.add(payoff(z));
                                        }
                                      }
                                      return s;
                                    });
  RunningStats total;
  for (const auto& s : parts) total.merge(s);
  return total.estimate(cfg.n_paths);
}

}  // namespace eps
