#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace roughfbm {

using Vec = std::vector<double>;

/// Thrown when an iterative numerical procedure fails to meet its contract
/// (non-convergence, loss of positive definiteness, NaN in user callbacks).
/// Input validation uses std::invalid_argument / std::domain_error instead.
class NumericalError : public std::runtime_error {
public:
  explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

inline bool is_power_of_two(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

inline std::size_t log2_exact(std::size_t n) {
  std::size_t m = 0;
  while ((std::size_t{1} << m) < n) ++m;
  if ((std::size_t{1} << m) != n) throw std::invalid_argument("log2_exact: not a power of two");
  return m;
}

} // namespace roughfbm
