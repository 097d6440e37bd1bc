#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>

#include "roughfbm/core.hpp"

namespace roughfbm {

/// Uniform dyadic time grid t_k = t0 + k (t1 - t0) / n, k = 0..n. The step
/// count must be a power of two so that every structure built on top can be
/// refined and coarsened dyadically.
struct Grid {
  double t0 = 0.0;
  double t1 = 1.0;
  std::size_t n = 1;

  Grid() = default;
  Grid(double start, double end, std::size_t steps) : t0(start), t1(end), n(steps) {
    if (!(t0 >= 0.0)) throw std::invalid_argument("Grid: t0 must be >= 0");
    if (!(t1 > t0)) throw std::invalid_argument("Grid: t1 must be > t0");
    if (n < 1) throw std::invalid_argument("Grid: n must be >= 1");
    if (!is_power_of_two(n)) throw std::invalid_argument("Grid: n must be a power of two");
  }

  double dt() const { return (t1 - t0) / static_cast<double>(n); }

  double time(std::size_t k) const {
    if (k > n) throw std::invalid_argument("Grid::time: index out of range");
    return t0 + static_cast<double>(k) * (t1 - t0) / static_cast<double>(n);
  }

  std::size_t levels() const { return log2_exact(n); }

  /// Grid with every `stride`-th node kept; stride must divide n exactly.
  Grid coarsened(std::size_t stride) const {
    if (stride == 0 || n % stride != 0) throw std::invalid_argument("Grid::coarsened: bad stride");
    return Grid(t0, t1, n / stride);
  }

  bool operator==(const Grid& o) const { return t0 == o.t0 && t1 == o.t1 && n == o.n; }
};

} // namespace roughfbm
