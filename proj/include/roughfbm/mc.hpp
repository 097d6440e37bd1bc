#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <thread>
#include <vector>

#include "roughfbm/core.hpp"

namespace roughfbm {

/// Pairwise (tree) summation with a fixed split, so the result is independent
/// of how the work that produced the addends was scheduled.
inline double pairwise_sum(std::span<const double> x) {
  if (x.size() <= 8) {
    double s = 0.0;
    for (double v : x) s += v;
    return s;
  }
  const std::size_t mid = x.size() / 2;
  return pairwise_sum(x.subspan(0, mid)) + pairwise_sum(x.subspan(mid));
}

inline double pairwise_mean(std::span<const double> x) {
  return x.empty() ? 0.0 : pairwise_sum(x) / static_cast<double>(x.size());
}

/// Run fn(i) for i in [0, n) over `workers` threads in contiguous chunks.
/// fn must write only to slot i of caller-owned storage; with that contract
/// results are identical for any worker count.
inline void parallel_for(std::size_t n, std::size_t workers, const std::function<void(std::size_t)>& fn) {
  if (workers <= 1 || n < 2) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  workers = std::min(workers, n);
  std::vector<std::thread> pool;
  pool.reserve(workers);
  const std::size_t chunk = (n + workers - 1) / workers;
  for (std::size_t w = 0; w < workers; ++w) {
    const std::size_t lo = w * chunk;
    const std::size_t hi = std::min(n, lo + chunk);
    if (lo >= hi) break;
    pool.emplace_back([lo, hi, &fn] {
      for (std::size_t i = lo; i < hi; ++i) fn(i);
    });
  }
  for (auto& t : pool) t.join();
}

inline std::size_t default_workers() {
  const unsigned hc = std::thread::hardware_concurrency();
  return hc == 0 ? 1 : hc;
}

/// Sample mean and standard error with the pairwise reduction.
struct MeanSe {
  double mean = 0.0;
  double se = 0.0;
};

inline MeanSe mean_and_se(std::span<const double> x) {
  MeanSe out;
  if (x.empty()) return out;
  out.mean = pairwise_mean(x);
  if (x.size() < 2) return out;
  std::vector<double> dev2(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double d = x[i] - out.mean;
    dev2[i] = d * d;
  }
  const double var = pairwise_sum(dev2) / static_cast<double>(x.size() - 1);
  out.se = std::sqrt(var / static_cast<double>(x.size()));
  return out;
}

} // namespace roughfbm
