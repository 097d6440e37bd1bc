#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <iostream>
#include <stdexcept>
#include <vector>

#include "roughfbm/core.hpp"
#include "roughfbm/fft.hpp"
#include "roughfbm/grid.hpp"
#include "roughfbm/linalg.hpp"
#include "roughfbm/rng.hpp"

namespace roughfbm {

/// Fractional Brownian motion with Hurst parameter H in (1/3, 1/2] and
/// `dimension` independent components.
struct FbmModel {
  double hurst = 0.5;
  std::size_t dimension = 1;

  FbmModel() = default;
  FbmModel(double h, std::size_t d) : hurst(h), dimension(d) {
    if (!(h > 1.0 / 3.0 && h <= 0.5))
      throw std::invalid_argument("FbmModel: hurst must lie in (1/3, 1/2]");
    if (d < 1) throw std::invalid_argument("FbmModel: dimension must be >= 1");
  }
};

/// Covariance E[B_s B_t] = (|t|^{2H} + |s|^{2H} - |t-s|^{2H}) / 2, per
/// component.
inline double covariance(const FbmModel& model, double s, double t) {
  if (s < 0.0 || t < 0.0) throw std::domain_error("covariance: times must be non-negative");
  const double h2 = 2.0 * model.hurst;
  return 0.5 * (std::pow(t, h2) + std::pow(s, h2) - std::pow(std::abs(t - s), h2));
}

/// One sampled trajectory on a uniform grid. values[k] holds the d components
/// at t_k; values[0] is the zero vector (sampling starts at t0 = 0).
/// Reproducibility: the path is a pure function of (model, grid, seed,
/// path_index); `stream_seed` records the derived per-path RNG seed.
struct FbmPath {
  FbmModel model;
  Grid grid;
  std::vector<Vec> values; // grid.n + 1 entries of size model.dimension
  std::uint64_t seed = 0;
  std::uint64_t path_index = 0;
  std::uint64_t stream_seed = 0;

  /// Path restricted to every `stride`-th node (stride must divide n).
  FbmPath subsample(std::size_t stride) const {
    FbmPath out;
    out.model = model;
    out.grid = grid.coarsened(stride);
    out.seed = seed;
    out.path_index = path_index;
    out.stream_seed = stream_seed;
    out.values.reserve(out.grid.n + 1);
    for (std::size_t k = 0; k <= out.grid.n; ++k) out.values.push_back(values[k * stride]);
    return out;
  }
};

namespace detail {

// Autocovariance of fractional Gaussian noise increments at lag k, step h:
// gamma(k) = h^{2H} (|k+1|^{2H} - 2|k|^{2H} + |k-1|^{2H}) / 2.
inline double fgn_autocov(double hurst, double h, std::size_t lag) {
  const double h2 = 2.0 * hurst;
  const double k = static_cast<double>(lag);
  if (lag == 0) return std::pow(h, h2);
  return 0.5 * std::pow(h, h2) *
         (std::pow(k + 1.0, h2) - 2.0 * std::pow(k, h2) + std::pow(k - 1.0, h2));
}

// Spectral data for the circulant embedding of the fGN covariance. Shared by
// all paths of a run, computed once.
struct CirculantEmbedding {
  std::size_t n = 0;              // number of increments
  std::vector<double> sqrt_eig;   // sqrt(lambda_k / (2n)), size 2n
  bool valid = false;
  double min_eigenvalue = 0.0;
};

inline CirculantEmbedding build_embedding(double hurst, double h, std::size_t n,
                                          double tol = 1e-10) {
  CirculantEmbedding emb;
  emb.n = n;
  const std::size_t m = 2 * n;
  std::vector<std::complex<double>> c(m);
  for (std::size_t k = 0; k <= n; ++k) c[k] = fgn_autocov(hurst, h, k);
  for (std::size_t k = 1; k < n; ++k) c[m - k] = c[k];
  fft_pow2(c);

  emb.sqrt_eig.resize(m);
  double min_eig = 0.0;
  double max_eig = 0.0;
  for (std::size_t k = 0; k < m; ++k) {
    const double lam = c[k].real();
    min_eig = std::min(min_eig, lam);
    max_eig = std::max(max_eig, lam);
  }
  emb.min_eigenvalue = min_eig;
  if (min_eig < -tol * std::max(1.0, max_eig)) {
    emb.valid = false;
    return emb;
  }
  for (std::size_t k = 0; k < m; ++k) {
    const double lam = std::max(0.0, c[k].real());
    emb.sqrt_eig[k] = std::sqrt(lam / static_cast<double>(m));
  }
  emb.valid = true;
  return emb;
}

// Draw one fGN vector (n increments) through the embedding; consumes 2n
// normals from `rng` in a fixed order.
inline void draw_fgn_circulant(const CirculantEmbedding& emb, NormalStream& rng,
                               std::vector<std::complex<double>>& work, Vec& out) {
  const std::size_t n = emb.n;
  const std::size_t m = 2 * n;
  work.assign(m, {0.0, 0.0});
  work[0] = emb.sqrt_eig[0] * rng();
  work[n] = emb.sqrt_eig[n] * rng();
  const double inv_sqrt2 = 0.70710678118654752440;
  for (std::size_t k = 1; k < n; ++k) {
    const double a = rng();
    const double b = rng();
    const std::complex<double> z(a * inv_sqrt2, b * inv_sqrt2);
    work[k] = emb.sqrt_eig[k] * z;
    work[m - k] = emb.sqrt_eig[m - k] * std::conj(z);
  }
  fft_pow2(work);
  out.resize(n);
  for (std::size_t k = 0; k < n; ++k) out[k] = work[k].real();
}

// Dense Cholesky factor of the fGN increment covariance (Toeplitz), with a
// single jitter retry of 1e-12 * max diagonal.
inline std::vector<double> fgn_cholesky(double hurst, double h, std::size_t n) {
  std::vector<double> cov(n * n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j <= i; ++j) {
      const double g = fgn_autocov(hurst, h, i - j);
      cov[i * n + j] = g;
      cov[j * n + i] = g;
    }
  std::vector<double> fac = cov;
  if (cholesky_in_place(fac, n)) return fac;
  const double jitter = 1e-12 * fgn_autocov(hurst, h, 0);
  fac = cov;
  for (std::size_t i = 0; i < n; ++i) fac[i * n + i] += jitter;
  if (!cholesky_in_place(fac, n))
    throw NumericalError("fbm sampler: covariance matrix not PSD after jitter");
  return fac;
}

inline void draw_fgn_cholesky(const std::vector<double>& chol, std::size_t n, NormalStream& rng,
                              Vec& out) {
  Vec z(n);
  for (std::size_t i = 0; i < n; ++i) z[i] = rng();
  out.assign(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    double s = 0;
    for (std::size_t j = 0; j <= i; ++j) s += chol[i * n + j] * z[j];
    out[i] = s;
  }
}

} // namespace detail

/// Exact fBM sampler on a uniform grid starting at t0 = 0. Default method is
/// circulant embedding of the increment covariance (spectrally exact); if the
/// embedding has an eigenvalue below -tolerance the sampler logs once and
/// falls back to a dense Cholesky factorization.
///
/// Each path consumes its own RNG stream seeded from (seed, path_index), so
/// results do not depend on how paths are distributed over workers.
inline std::vector<FbmPath> sample_paths(const FbmModel& model, const Grid& grid,
                                         std::uint64_t seed, std::size_t count) {
  if (count < 1) throw std::invalid_argument("sample_paths: count must be >= 1");
  if (grid.t0 != 0.0)
    throw std::domain_error("sample_paths: sampling requires t0 = 0 (path starts at zero)");

  const std::size_t n = grid.n;
  const std::size_t d = model.dimension;
  const double h = grid.dt();

  detail::CirculantEmbedding emb = detail::build_embedding(model.hurst, h, n);
  std::vector<double> chol;
  if (!emb.valid) {
    std::clog << "roughfbm: circulant embedding has eigenvalue " << emb.min_eigenvalue
              << " below tolerance; falling back to dense Cholesky\n";
    chol = detail::fgn_cholesky(model.hurst, h, n);
  }

  std::vector<FbmPath> paths(count);
  std::vector<std::complex<double>> work;
  Vec fgn;
  for (std::size_t p = 0; p < count; ++p) {
    FbmPath& path = paths[p];
    path.model = model;
    path.grid = grid;
    path.seed = seed;
    path.path_index = p;
    path.stream_seed = derive_stream_seed(seed, p);
    NormalStream rng(path.stream_seed);

    path.values.assign(n + 1, Vec(d, 0.0));
    for (std::size_t c = 0; c < d; ++c) {
      if (emb.valid)
        detail::draw_fgn_circulant(emb, rng, work, fgn);
      else
        detail::draw_fgn_cholesky(chol, n, rng, fgn);
      double acc = 0.0;
      for (std::size_t k = 0; k < n; ++k) {
        acc += fgn[k];
        path.values[k + 1][c] = acc;
      }
    }
  }
  return paths;
}

/// Single path draw with an explicit path index (for streaming Monte Carlo
/// without materializing the whole ensemble).
inline FbmPath sample_path(const FbmModel& model, const Grid& grid, std::uint64_t seed,
                           std::uint64_t path_index) {
  if (grid.t0 != 0.0)
    throw std::domain_error("sample_path: sampling requires t0 = 0 (path starts at zero)");
  const std::size_t n = grid.n;
  const std::size_t d = model.dimension;
  const double h = grid.dt();

  static thread_local struct {
    double hurst = -1.0;
    double step = -1.0;
    std::size_t n = 0;
    detail::CirculantEmbedding emb;
  } cache;
  if (cache.hurst != model.hurst || cache.step != h || cache.n != n) {
    cache.emb = detail::build_embedding(model.hurst, h, n);
    cache.hurst = model.hurst;
    cache.step = h;
    cache.n = n;
    if (!cache.emb.valid)
      std::clog << "roughfbm: circulant embedding has eigenvalue " << cache.emb.min_eigenvalue
                << " below tolerance; falling back to dense Cholesky\n";
  }

  FbmPath path;
  path.model = model;
  path.grid = grid;
  path.seed = seed;
  path.path_index = path_index;
  path.stream_seed = derive_stream_seed(seed, path_index);
  NormalStream rng(path.stream_seed);
  path.values.assign(n + 1, Vec(d, 0.0));

  std::vector<std::complex<double>> work;
  Vec fgn;
  std::vector<double> chol;
  if (!cache.emb.valid) chol = detail::fgn_cholesky(model.hurst, h, n);
  for (std::size_t c = 0; c < d; ++c) {
    if (cache.emb.valid)
      detail::draw_fgn_circulant(cache.emb, rng, work, fgn);
    else
      detail::draw_fgn_cholesky(chol, n, rng, fgn);
    double acc = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
      acc += fgn[k];
      path.values[k + 1][c] = acc;
    }
  }
  return path;
}

} // namespace roughfbm
