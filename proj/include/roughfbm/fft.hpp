#pragma once

#include <complex>
#include <vector>

#include "roughfbm/core.hpp"

namespace roughfbm::detail {

// In-place iterative radix-2 FFT (decimation in time). Grids in this library
// are dyadic by contract, so the power-of-two restriction costs nothing and we
// avoid dragging an FFT dependency into a header-only core.
inline void fft_pow2(std::vector<std::complex<double>>& x, bool inverse = false) {
  const std::size_t n = x.size();
  if (n <= 1) return;
  if (!is_power_of_two(n)) throw std::invalid_argument("fft_pow2: size must be a power of two");

  // bit reversal permutation
  for (std::size_t i = 1, j = 0; i < n; ++i) {
    std::size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(x[i], x[j]);
  }

  const double pi = 3.14159265358979323846;
  for (std::size_t len = 2; len <= n; len <<= 1) {
    const double ang = 2.0 * pi / static_cast<double>(len) * (inverse ? 1.0 : -1.0);
    const std::complex<double> wlen(std::cos(ang), std::sin(ang));
    for (std::size_t i = 0; i < n; i += len) {
      std::complex<double> w(1.0, 0.0);
      for (std::size_t k = 0; k < len / 2; ++k) {
        const std::complex<double> u = x[i + k];
        const std::complex<double> v = x[i + k + len / 2] * w;
        x[i + k] = u + v;
        x[i + k + len / 2] = u - v;
        w *= wlen;
      }
    }
  }
  if (inverse) {
    const double inv = 1.0 / static_cast<double>(n);
    for (auto& c : x) c *= inv;
  }
}

} // namespace roughfbm::detail
