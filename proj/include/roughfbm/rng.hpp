#pragma once

#include <cmath>
#include <cstdint>
#include <random>

#include "roughfbm/core.hpp"

namespace roughfbm {

// splitmix64 mixing step (Steele, Lea, Flood 2014). Used to derive independent
// per-path seeds from (run seed, path index) so that serial and parallel
// sampling consume identical streams.
inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline std::uint64_t derive_stream_seed(std::uint64_t seed, std::uint64_t index) {
  std::uint64_t s = seed;
  std::uint64_t a = splitmix64(s);
  s ^= index * 0x9e3779b97f4a7c15ULL;
  std::uint64_t b = splitmix64(s);
  return a ^ (b + 0x632be59bd9b4e019ULL + (index << 1));
}

// Standard normal stream over mt19937_64 with an explicit Box-Muller
// transform. mt19937_64 output is pinned by the standard and the transform is
// ours, so draws are bit-identical across platforms and library versions.
class NormalStream {
public:
  explicit NormalStream(std::uint64_t seed) : engine_(seed) {}

  double operator()() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u1, u2;
    do {
      u1 = uniform01();
    } while (u1 <= 0.0);
    u2 = uniform01();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 2.0 * 3.14159265358979323846 * u2;
    spare_ = r * std::sin(theta);
    have_spare_ = true;
    return r * std::cos(theta);
  }

  double uniform01() {
    // 53-bit uniform in [0, 1)
    return (engine_() >> 11) * (1.0 / 9007199254740992.0);
  }

private:
  std::mt19937_64 engine_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

} // namespace roughfbm
