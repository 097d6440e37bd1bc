#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <span>
#include <stdexcept>
#include <vector>

#include "roughfbm/core.hpp"
#include "roughfbm/fbm.hpp"
#include "roughfbm/grid.hpp"
#include "roughfbm/linalg.hpp"

namespace roughfbm {

enum class Flavor { stratonovich, ito, generic };

inline const char* to_string(Flavor f) {
  switch (f) {
    case Flavor::stratonovich: return "strat";
    case Flavor::ito: return "ito";
    default: return "generic";
  }
}

/// Level-2 rough path over a uniform grid, stored in per-step (increment)
/// form: inc holds the first-level increments X^1 over each step and lv2 the
/// second-level d x d tensors X^2 over each step, both flattened row-major.
/// Values over coarser intervals are reconstructed through Chen's identity
/// (see chen_reconstruct), which keeps storage at O(n) rather than O(n^2).
///
/// `start` is the path value at t0, so node values are start + prefix sums of
/// inc. For integrals (which begin at zero) start is the zero vector.
class Level2Path {
public:
  Grid grid;
  std::size_t dim = 1;
  Flavor flavor = Flavor::generic;
  Vec start;
  std::vector<double> inc; // grid.n * dim
  std::vector<double> lv2; // grid.n * dim * dim

  Level2Path() = default;
  Level2Path(const Grid& g, std::size_t d, Flavor f)
      : grid(g), dim(d), flavor(f), start(d, 0.0), inc(g.n * d, 0.0), lv2(g.n * d * d, 0.0) {}

  std::size_t steps() const { return grid.n; }

  std::span<double> inc_at(std::size_t k) { return {inc.data() + k * dim, dim}; }
  std::span<const double> inc_at(std::size_t k) const { return {inc.data() + k * dim, dim}; }
  std::span<double> lv2_at(std::size_t k) { return {lv2.data() + k * dim * dim, dim * dim}; }
  std::span<const double> lv2_at(std::size_t k) const {
    return {lv2.data() + k * dim * dim, dim * dim};
  }

  double lv2_at(std::size_t k, std::size_t i, std::size_t j) const {
    return lv2[(k * dim + i) * dim + j];
  }

  /// Path values at all grid nodes (start + cumulative increments).
  std::vector<Vec> nodes() const {
    std::vector<Vec> v(grid.n + 1, start);
    for (std::size_t k = 0; k < grid.n; ++k) {
      v[k + 1] = v[k];
      axpy(1.0, inc_at(k), v[k + 1]);
    }
    return v;
  }
};

/// (X^1_{s,t}, X^2_{s,t}) over the grid interval [node i, node j], assembled
/// as a strict left fold over the per-step data via Chen's identity:
///   X^1_{s,t} = X^1_{s,u} + X^1_{u,t},
///   X^2_{s,t} = X^2_{s,u} + X^2_{u,t} + X^1_{s,u} (x) X^1_{u,t}.
inline std::pair<Vec, Mat> chen_reconstruct(const Level2Path& rp, std::size_t i, std::size_t j) {
  if (i > j || j > rp.grid.n) throw std::invalid_argument("chen_reconstruct: bad node indices");
  const std::size_t d = rp.dim;
  Vec x1(d, 0.0);
  Mat x2(d, d);
  for (std::size_t k = i; k < j; ++k) {
    const auto dk = rp.inc_at(k);
    add_outer(x2, x1, dk);
    const auto l2 = rp.lv2_at(k);
    for (std::size_t q = 0; q < d * d; ++q) x2.a[q] += l2[q];
    axpy(1.0, dk, x1);
  }
  return {std::move(x1), std::move(x2)};
}

/// Time-indexed reconstruction; s and t must be grid nodes.
inline std::pair<Vec, Mat> chen_reconstruct_times(const Level2Path& rp, double s, double t) {
  const double dt = rp.grid.dt();
  const double is = (s - rp.grid.t0) / dt;
  const double it = (t - rp.grid.t0) / dt;
  const auto near_int = [](double x) { return std::abs(x - std::round(x)) < 1e-9; };
  if (!near_int(is) || !near_int(it))
    throw std::invalid_argument("chen_reconstruct: times must be grid nodes");
  const auto i = static_cast<std::size_t>(std::llround(is));
  const auto j = static_cast<std::size_t>(std::llround(it));
  return chen_reconstruct(rp, i, j);
}

/// Canonical (Stratonovich) lift of a sampled path through its dyadic
/// piecewise-linear interpolation at level m: the path is subsampled to
/// 2^m steps and each step [t_k, t_{k+1}] carries the exact iterated
/// integrals of the linear segment, X^2 = Delta (x) Delta / 2. Defaults to
/// the full grid resolution m = log2(n).
inline Level2Path lift_stratonovich(const FbmPath& path, std::size_t level = SIZE_MAX) {
  const std::size_t full = path.grid.levels();
  if (level == SIZE_MAX) level = full;
  if (level > full) throw std::invalid_argument("lift_stratonovich: level exceeds grid resolution");
  const std::size_t stride = std::size_t{1} << (full - level);
  const std::size_t d = path.model.dimension;

  Level2Path rp(path.grid.coarsened(stride), d, Flavor::stratonovich);
  rp.start = path.values[0];
  for (std::size_t k = 0; k < rp.grid.n; ++k) {
    const Vec& a = path.values[k * stride];
    const Vec& b = path.values[(k + 1) * stride];
    auto ik = rp.inc_at(k);
    for (std::size_t c = 0; c < d; ++c) ik[c] = b[c] - a[c];
    auto l2 = rp.lv2_at(k);
    for (std::size_t i = 0; i < d; ++i)
      for (std::size_t j = 0; j < d; ++j) l2[i * d + j] = 0.5 * ik[i] * ik[j];
  }
  return rp;
}

/// Additive time perturbation phi, applied to the diagonal of the second
/// level: X(phi)^2_{s,t} = X^2_{s,t} - (phi(t) - phi(s)) I.
struct Perturbation {
  std::function<double(double)> phi;
};

inline Perturbation pow2h_perturbation(double hurst, double scale = 0.5) {
  const double h2 = 2.0 * hurst;
  return Perturbation{[h2, scale](double t) { return scale * std::pow(t, h2); }};
}

inline Level2Path perturb(const Level2Path& rp, const Perturbation& phi) {
  Level2Path out = rp;
  out.flavor = Flavor::generic;
  const std::size_t d = rp.dim;
  for (std::size_t k = 0; k < rp.grid.n; ++k) {
    const double dphi = phi.phi(rp.grid.time(k + 1)) - phi.phi(rp.grid.time(k));
    auto l2 = out.lv2_at(k);
    for (std::size_t i = 0; i < d; ++i) l2[i * d + i] -= dphi;
  }
  return out;
}

/// Ito lift: Stratonovich second level minus (t^{2H} - s^{2H})/2 on the
/// diagonal. Computed as the phi = t^{2H}/2 perturbation of the canonical
/// lift so the two constructions agree bitwise.
inline Level2Path lift_ito(const FbmPath& path, std::size_t level = SIZE_MAX) {
  Level2Path rp = perturb(lift_stratonovich(path, level), pow2h_perturbation(path.model.hurst));
  rp.flavor = Flavor::ito;
  return rp;
}

/// Empirical p-variation diagnostics. The suprema run over all partitions
/// with nodes on the (dyadic) grid, computed by dynamic programming; they are
/// reported for inspection only and never drive control flow.
struct PVarDiagnostics {
  double p = 0.0;
  double level1_pvar = 0.0;  // sup_D sum |X^1|^p
  double level2_pvar2 = 0.0; // sup_D sum |X^2|^{p/2}
};

inline PVarDiagnostics pvar_diagnostics(const Level2Path& rp, double p, double hurst) {
  if (!(p > 1.0 / hurst && p < 3.0))
    throw std::invalid_argument("pvar_diagnostics: need 1/H < p < 3");
  const std::size_t n = rp.grid.n;
  const std::size_t d = rp.dim;

  // cumulative X^1_{0,k} and X^2_{0,k}
  std::vector<Vec> c1(n + 1, Vec(d, 0.0));
  std::vector<Mat> c2(n + 1, Mat(d, d));
  for (std::size_t k = 0; k < n; ++k) {
    c1[k + 1] = c1[k];
    c2[k + 1] = c2[k];
    add_outer(c2[k + 1], c1[k], rp.inc_at(k));
    const auto l2 = rp.lv2_at(k);
    for (std::size_t q = 0; q < d * d; ++q) c2[k + 1].a[q] += l2[q];
    axpy(1.0, rp.inc_at(k), c1[k + 1]);
  }

  const auto x1_norm = [&](std::size_t i, std::size_t j) {
    double s = 0;
    for (std::size_t c = 0; c < d; ++c) {
      const double v = c1[j][c] - c1[i][c];
      s += v * v;
    }
    return std::sqrt(s);
  };
  const auto x2_norm = [&](std::size_t i, std::size_t j) {
    // X^2_{i,j} = X^2_{0,j} - X^2_{0,i} - X^1_{0,i} (x) X^1_{i,j}
    double s = 0;
    for (std::size_t a = 0; a < d; ++a)
      for (std::size_t b = 0; b < d; ++b) {
        const double v = c2[j](a, b) - c2[i](a, b) - c1[i][a] * (c1[j][b] - c1[i][b]);
        s += v * v;
      }
    return std::sqrt(s);
  };

  // V[k] = best value of sum over a partition of [0, k]
  std::vector<double> v1(n + 1, 0.0), v2(n + 1, 0.0);
  for (std::size_t k = 1; k <= n; ++k) {
    double b1 = 0.0, b2 = 0.0;
    for (std::size_t j = 0; j < k; ++j) {
      b1 = std::max(b1, v1[j] + std::pow(x1_norm(j, k), p));
      b2 = std::max(b2, v2[j] + std::pow(x2_norm(j, k), p / 2.0));
    }
    v1[k] = b1;
    v2[k] = b2;
  }

  PVarDiagnostics out;
  out.p = p;
  out.level1_pvar = v1[n];
  out.level2_pvar2 = v2[n];
  return out;
}

inline double default_pvar_exponent(double hurst) { return 0.5 * (1.0 / hurst + 3.0); }

/// Time-like coordinate used to extend a rough path by one dimension:
/// psi is the coordinate value, anti its antiderivative (needed for the exact
/// per-step cross integrals of the piecewise-linear model).
struct TimeCoordinate {
  std::function<double(double)> psi;
  std::function<double(double)> anti;
};

inline TimeCoordinate linear_time() {
  return {[](double t) { return t; }, [](double t) { return 0.5 * t * t; }};
}

inline TimeCoordinate pow2h_time(double hurst) {
  const double h2 = 2.0 * hurst;
  return {[h2](double t) { return std::pow(t, h2); },
          [h2](double t) { return std::pow(t, h2 + 1.0) / (h2 + 1.0); }};
}

/// Extend rp by a monotone time-like coordinate psi(t) as a (d+1)-th
/// component. Per step [s, t] with increment Delta the extension carries the
/// exact iterated integrals of the piecewise-linear segment against psi:
///   block [x, psi]: int (X^1_{s,u}) dpsi_u = Delta dpsi - block [psi, x]
///   block [psi, x]: int (psi_u - psi_s) dX_u = Delta (Anti(t)-Anti(s))/(t-s) - Delta psi(s)
///   corner:         (dpsi)^2 / 2.
/// The d x d block is copied from rp, so the extension of an Ito-flavored
/// path differs from the Stratonovich one only there.
inline Level2Path augment_with_time(const Level2Path& rp, const TimeCoordinate& tc) {
  const std::size_t d = rp.dim;
  const std::size_t e = d + 1;
  Level2Path out(rp.grid, e, rp.flavor);
  for (std::size_t c = 0; c < d; ++c) out.start[c] = rp.start[c];
  out.start[d] = tc.psi(rp.grid.t0);

  for (std::size_t k = 0; k < rp.grid.n; ++k) {
    const double s = rp.grid.time(k);
    const double t = rp.grid.time(k + 1);
    const double dpsi = tc.psi(t) - tc.psi(s);
    const double mean_psi = (tc.anti(t) - tc.anti(s)) / (t - s) - tc.psi(s);

    const auto din = rp.inc_at(k);
    auto oin = out.inc_at(k);
    for (std::size_t c = 0; c < d; ++c) oin[c] = din[c];
    oin[d] = dpsi;

    auto l2 = out.lv2_at(k);
    const auto src = rp.lv2_at(k);
    for (std::size_t i = 0; i < d; ++i)
      for (std::size_t j = 0; j < d; ++j) l2[i * e + j] = src[i * d + j];
    for (std::size_t j = 0; j < d; ++j) {
      const double cross_ux = din[j] * mean_psi;        // int (psi_u - psi_s) dX^j
      l2[d * e + j] = cross_ux;
      l2[j * e + d] = din[j] * dpsi - cross_ux;         // int X^1_{s,u}[j] dpsi
    }
    l2[d * e + d] = 0.5 * dpsi * dpsi;
  }
  return out;
}

/// Space-time extension (B, t); the representation is a (d+1)-dimensional
/// Level2Path whose blocks are
///   [0..d)x[0..d): X^2,   [j, d]: int X^1 du,   [d, j]: int (u-s) dX,
///   [d, d]: (t-s)^2 / 2.
inline Level2Path lift_spacetime(const Level2Path& rp) {
  return augment_with_time(rp, linear_time());
}

// Named accessors for the space-time blocks of an extended path.
inline double spacetime_cross_xu(const Level2Path& ext, std::size_t k, std::size_t j) {
  return ext.lv2_at(k, j, ext.dim - 1);
}
inline double spacetime_cross_ux(const Level2Path& ext, std::size_t k, std::size_t j) {
  return ext.lv2_at(k, ext.dim - 1, j);
}
inline double spacetime_time2(const Level2Path& ext, std::size_t k) {
  return ext.lv2_at(k, ext.dim - 1, ext.dim - 1);
}

} // namespace roughfbm
