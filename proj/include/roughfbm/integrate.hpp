#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <vector>

#include "roughfbm/core.hpp"
#include "roughfbm/fbm.hpp"
#include "roughfbm/linalg.hpp"
#include "roughfbm/mc.hpp"
#include "roughfbm/oneform.hpp"
#include "roughfbm/roughpath.hpp"

namespace roughfbm {

// ---------------------------------------------------------------------------
// Young integration of scalar callables
// ---------------------------------------------------------------------------

struct YoungOptions {
  double rel_tol = 1e-9;
  int max_doublings = 22;
  bool require_convergence = true;
};

struct YoungResult {
  double value = 0.0;
  bool converged = false;
  double last_gap = 0.0;
  int doublings = 0;
};

/// Left-point Riemann-Stieltjes integral int_s^t f dg, computed on doubling
/// uniform partitions with Richardson acceleration (Romberg tableau with
/// factor-2 eliminations, matching the first-order error of left sums).
/// Stops when successive accelerated values agree to rel_tol; throws
/// NumericalError with the gap history if the budget is exhausted and
/// require_convergence is set.
inline YoungResult young_integral(const std::function<double(double)>& f,
                                  const std::function<double(double)>& g, double s, double t,
                                  YoungOptions opt = {}) {
  if (!(t >= s)) throw std::invalid_argument("young_integral: need s <= t");
  YoungResult res;
  if (t == s) {
    res.converged = true;
    return res;
  }

  std::vector<std::vector<double>> tab; // tab[k] = row of the tableau at 2^k points
  std::vector<double> gaps;
  double prev_diag = 0.0;
  for (int k = 0; k <= opt.max_doublings; ++k) {
    const std::size_t m = std::size_t{1} << k;
    const double h = (t - s) / static_cast<double>(m);
    double sum = 0.0;
    double g_prev = g(s);
    for (std::size_t i = 0; i < m; ++i) {
      const double a = s + static_cast<double>(i) * h;
      const double g_next = g(s + static_cast<double>(i + 1) * h);
      sum += f(a) * (g_next - g_prev);
      g_prev = g_next;
    }
    std::vector<double> row(static_cast<std::size_t>(k) + 1);
    row[0] = sum;
    for (int j = 1; j <= k; ++j) {
      const double factor = static_cast<double>(std::size_t{1} << j);
      row[j] = (factor * row[j - 1] - tab[k - 1][j - 1]) / (factor - 1.0);
    }
    tab.push_back(row);

    const double diag = row.back();
    if (k > 0) {
      const double scale = std::max({std::abs(diag), std::abs(row[0]), 1e-30});
      const double gap = std::abs(diag - prev_diag) / scale;
      gaps.push_back(gap);
      if (gap < opt.rel_tol) {
        res.value = diag;
        res.converged = true;
        res.last_gap = gap;
        res.doublings = k;
        return res;
      }
    }
    prev_diag = diag;
  }

  res.value = prev_diag;
  res.converged = false;
  res.last_gap = gaps.empty() ? 0.0 : gaps.back();
  res.doublings = opt.max_doublings;
  if (opt.require_convergence) {
    std::ostringstream msg;
    msg << "young_integral: no convergence after " << opt.max_doublings
        << " doublings; last gaps:";
    for (std::size_t i = gaps.size() > 4 ? gaps.size() - 4 : 0; i < gaps.size(); ++i)
      msg << ' ' << gaps[i];
    throw NumericalError(msg.str());
  }
  return res;
}

/// Piecewise-linear interpolant of sampled values on a grid, for feeding
/// sampled paths into young_integral.
inline std::function<double(double)> linear_interpolant(const Grid& grid, std::vector<double> v) {
  if (v.size() != grid.n + 1) throw std::invalid_argument("linear_interpolant: size mismatch");
  return [grid, v = std::move(v)](double t) {
    const double x = (t - grid.t0) / grid.dt();
    const double fl = std::floor(x);
    std::size_t k = static_cast<std::size_t>(std::max(0.0, fl));
    if (k >= grid.n) k = grid.n - 1;
    const double w = x - static_cast<double>(k);
    return v[k] * (1.0 - w) + v[k + 1] * w;
  };
}

// Left-point Stieltjes sum of sampled values against sampled integrator
// increments; the grid-resolution workhorse behind every correction term.
inline double young_left_sum(std::span<const double> f_nodes, std::span<const double> g_nodes) {
  double s = 0.0;
  for (std::size_t k = 0; k + 1 < g_nodes.size(); ++k) s += f_nodes[k] * (g_nodes[k + 1] - g_nodes[k]);
  return s;
}

// ---------------------------------------------------------------------------
// Rough integration of one-forms (compensated Riemann sums)
// ---------------------------------------------------------------------------

struct IntegrateOptions {
  std::size_t stride = 1;              // evaluate on every stride-th node
  bool include_time_cross_terms = false; // diagnostic: keep the o(|P|) terms
};

namespace detail {

inline void check_finite(const Mat& m, double t, const char* what) {
  for (double v : m.a)
    if (!std::isfinite(v)) {
      std::ostringstream msg;
      msg << "integrate_one_form: " << what << " returned non-finite value at t = " << t;
      throw NumericalError(msg.str());
    }
}

inline void check_finite(const Tensor3& m, double t, const char* what) {
  for (double v : m.a)
    if (!std::isfinite(v)) {
      std::ostringstream msg;
      msg << "integrate_one_form: " << what << " returned non-finite value at t = " << t;
      throw NumericalError(msg.str());
    }
}

} // namespace detail

/// Rough integral of a one-form against a level-2 rough path, as the
/// compensated Riemann sum at the working partition (every stride-th node):
///   Y^1 over a block = F(X_u) X^1 + DF(X_u) X^2,
///   Y^2 over a block = F(X_u) (x) F(X_u) X^2,
/// with block data reconstructed through Chen's identity. The result is again
/// a per-step level-2 path (over R^e) whose interval values are queried with
/// chen_reconstruct; its flavor is inherited from the driver.
///
/// Time-dependent forms are integrated through the space-time extension: the
/// driver must then be the (d+1)-dimensional extended path (pass the base
/// path and it is extended here). The derivative-times-cross-block terms that
/// vanish with the mesh are dropped unless include_time_cross_terms is set.
inline Level2Path integrate_one_form(const OneForm& F, const Level2Path& driver,
                                     IntegrateOptions opt = {}) {
  if (!F.value || !F.dx) throw std::invalid_argument("integrate_one_form: F and DxF required");

  const bool timedep = F.time_dependent;
  if (timedep && driver.dim == F.dim) {
    return integrate_one_form(F, lift_spacetime(driver), opt);
  }
  const std::size_t expected = timedep ? F.dim + 1 : F.dim;
  if (driver.dim != expected)
    throw std::invalid_argument("integrate_one_form: driver dimension does not match form");

  const std::size_t n = driver.grid.n;
  const std::size_t stride = opt.stride;
  if (stride == 0 || n % stride != 0)
    throw std::invalid_argument("integrate_one_form: stride must divide the step count");
  const std::size_t d = F.dim;     // spatial dimension the form sees
  const std::size_t e = F.codim;
  const std::size_t dd = driver.dim;

  Level2Path out(driver.grid.coarsened(stride), e, driver.flavor);
  const auto nodes = driver.nodes();

  Vec x(d);
  for (std::size_t blk = 0; blk < out.grid.n; ++blk) {
    const std::size_t i = blk * stride;
    const double t = driver.grid.time(i);
    for (std::size_t c = 0; c < d; ++c) x[c] = nodes[i][c];

    Vec x1(dd, 0.0);
    Mat x2(dd, dd);
    if (stride == 1) {
      const auto ik = driver.inc_at(i);
      std::copy(ik.begin(), ik.end(), x1.begin());
      const auto l2 = driver.lv2_at(i);
      std::copy(l2.begin(), l2.end(), x2.a.begin());
    } else {
      auto rec = chen_reconstruct(driver, i, i + stride);
      x1 = std::move(rec.first);
      x2 = std::move(rec.second);
    }

    const Mat f = F.value(x, t);
    detail::check_finite(f, t, "F");
    const Tensor3 df = F.dx(x, t);
    detail::check_finite(df, t, "DxF");

    auto y1 = out.inc_at(blk);
    for (std::size_t a = 0; a < e; ++a) {
      double s = 0.0;
      for (std::size_t j = 0; j < d; ++j) s += f(a, j) * x1[j];
      for (std::size_t j = 0; j < d; ++j)
        for (std::size_t k = 0; k < d; ++k) s += df(a, j, k) * x2(j, k);
      y1[a] = s;
    }
    if (timedep && opt.include_time_cross_terms && F.dt) {
      const Mat ft = F.dt(x, t);
      for (std::size_t a = 0; a < e; ++a) {
        double s = 0.0;
        for (std::size_t k = 0; k < d; ++k) s += ft(a, k) * x2(k, d); // int X^1 dpsi block
        y1[a] += s;
      }
    }

    auto y2 = out.lv2_at(blk);
    for (std::size_t a = 0; a < e; ++a)
      for (std::size_t b = 0; b < e; ++b) {
        double s = 0.0;
        for (std::size_t j = 0; j < d; ++j)
          for (std::size_t l = 0; l < d; ++l) s += f(a, j) * f(b, l) * x2(j, l);
        y2[a * e + b] = s;
      }
  }
  return out;
}

/// Interval value of the rough integral at a sequence of partition strides;
/// used for the fixed-mesh convergence reports.
struct RefinementReport {
  std::vector<std::size_t> partition_sizes;
  std::vector<double> level1_change; // |I_{2m} - I_m| sup over components
  double final_gap = 0.0;
};

inline RefinementReport integral_refinement_report(const OneForm& F, const Level2Path& driver,
                                                   std::vector<std::size_t> strides) {
  RefinementReport rep;
  std::sort(strides.begin(), strides.end(), std::greater<>());
  Vec prev;
  for (std::size_t s : strides) {
    IntegrateOptions opt;
    opt.stride = s;
    const Level2Path y = integrate_one_form(F, driver, opt);
    auto [lvl1, lvl2] = chen_reconstruct(y, 0, y.grid.n);
    rep.partition_sizes.push_back(y.grid.n);
    if (!prev.empty()) {
      double gap = 0.0;
      for (std::size_t c = 0; c < lvl1.size(); ++c) gap = std::max(gap, std::abs(lvl1[c] - prev[c]));
      rep.level1_change.push_back(gap);
      rep.final_gap = gap;
    }
    prev = lvl1;
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Stratonovich <-> Ito translation for integrals of one-forms
// ---------------------------------------------------------------------------

/// Which cumulative array the level-2 translation differences to realize the
/// d(X^S)^1_{0,u} integrator: the displayed equation's 0-based primitive or
/// the interval-based one. The integrator only sees increments, so both give
/// the same values; the test suite asserts that.
enum class PrimitiveConvention { zero_based, interval_based };

struct StratItoCorrections {
  Vec level1;  // (X^S)^1 - (X^I)^1 over the interval
  Mat level2;  // (X^S)^2 - (X^I)^2 over the interval
};

/// The translation corrections over grid interval [node i, node j]:
///   level 1:  (1/2) int DF(B_u, u) du^{2H}   (trace over the two path slots)
///   level 2:  (1/2) int F (x) F du^{2H}
///           + (1/2) int (int_s^u DF dr^{2H}) (x) d(X^S)^1
///           + (1/2) int (X^S)^1_{s,u} (x) DF du^{2H}
///           - (1/4) int (int_s^u DF dr^{2H}) (x) DF du^{2H},
/// all Young integrals evaluated at grid resolution with left-point values
/// and exact u^{2H} increments.
inline StratItoCorrections strat_ito_corrections(
    const OneForm& F, const Level2Path& strat_integral, const Level2Path& strat_lift,
    double hurst, std::size_t i, std::size_t j,
    PrimitiveConvention conv = PrimitiveConvention::zero_based) {
  const std::size_t d = F.dim;
  const std::size_t e = F.codim;
  if (strat_integral.grid.n != strat_lift.grid.n)
    throw std::invalid_argument("strat_ito_corrections: grids must match");

  const auto nodes = strat_lift.nodes();
  const Grid& grid = strat_lift.grid;
  const double h2 = 2.0 * hurst;

  // level-1 primitive of the strat integral, 0-based or interval-based
  const std::size_t base = conv == PrimitiveConvention::zero_based ? 0 : i;
  std::vector<Vec> s1(grid.n + 1, Vec(e, 0.0));
  for (std::size_t k = base; k < grid.n; ++k) {
    s1[k + 1] = s1[k];
    axpy(1.0, strat_integral.inc_at(k), s1[k + 1]);
  }

  StratItoCorrections out;
  out.level1.assign(e, 0.0);
  out.level2 = Mat(e, e);

  Vec inner(e, 0.0); // int_s^u trace DF dr^{2H}
  Vec s1_su(e, 0.0); // (X^S)^1_{s,u}
  Vec x(d);
  for (std::size_t k = i; k < j; ++k) {
    const double t_k = grid.time(k);
    const double dtau = std::pow(grid.time(k + 1), h2) - std::pow(t_k, h2);
    for (std::size_t c = 0; c < d; ++c) x[c] = nodes[k][c];

    const Mat f = F.value(x, t_k);
    const Tensor3 df = F.dx(x, t_k);
    Vec trace_df(e, 0.0);
    for (std::size_t a = 0; a < e; ++a)
      for (std::size_t m = 0; m < d; ++m) trace_df[a] += df(a, m, m);

    // T1 - T4, accumulated with left-point values
    for (std::size_t a = 0; a < e; ++a) {
      out.level1[a] += 0.5 * trace_df[a] * dtau;
      for (std::size_t b = 0; b < e; ++b) {
        double ffT = 0.0;
        for (std::size_t m = 0; m < d; ++m) ffT += f(a, m) * f(b, m);
        const double ds1_b = s1[k + 1][b] - s1[k][b];
        out.level2(a, b) += 0.5 * ffT * dtau                 // T1
                            + 0.5 * inner[a] * ds1_b          // T2
                            + 0.5 * s1_su[a] * trace_df[b] * dtau // T3
                            - 0.25 * inner[a] * trace_df[b] * dtau; // T4
      }
    }

    for (std::size_t a = 0; a < e; ++a) {
      inner[a] += trace_df[a] * dtau;
      s1_su[a] += strat_integral.inc_at(k)[a];
    }
  }
  return out;
}

/// Ito-flavored integral obtained from the Stratonovich one by applying the
/// per-step translation corrections. Composing the per-step data through
/// Chen's identity reproduces the interval corrections of
/// strat_ito_corrections exactly.
inline Level2Path ito_strat_translate(const OneForm& F, const Level2Path& strat_integral,
                                      const Level2Path& strat_lift, double hurst) {
  const std::size_t d = F.dim;
  const std::size_t e = F.codim;
  Level2Path out = strat_integral;
  out.flavor = Flavor::ito;
  const auto nodes = strat_lift.nodes();
  const Grid& grid = strat_lift.grid;
  const double h2 = 2.0 * hurst;

  Vec x(d);
  for (std::size_t k = 0; k < grid.n; ++k) {
    const double t_k = grid.time(k);
    const double dtau = std::pow(grid.time(k + 1), h2) - std::pow(t_k, h2);
    for (std::size_t c = 0; c < d; ++c) x[c] = nodes[k][c];
    const Mat f = F.value(x, t_k);
    const Tensor3 df = F.dx(x, t_k);

    auto y1 = out.inc_at(k);
    for (std::size_t a = 0; a < e; ++a) {
      double tr = 0.0;
      for (std::size_t m = 0; m < d; ++m) tr += df(a, m, m);
      y1[a] -= 0.5 * tr * dtau;
    }
    auto y2 = out.lv2_at(k);
    for (std::size_t a = 0; a < e; ++a)
      for (std::size_t b = 0; b < e; ++b) {
        double ffT = 0.0;
        for (std::size_t m = 0; m < d; ++m) ffT += f(a, m) * f(b, m);
        y2[a * e + b] -= 0.5 * ffT * dtau;
      }
  }
  return out;
}

/// Inverse direction: reconstruct the Stratonovich integral from an Ito one
/// by adding the corrections, which are re-derived from Ito-side quantities.
inline Level2Path strat_from_ito(const OneForm& F, const Level2Path& ito_integral,
                                 const Level2Path& strat_lift, double hurst) {
  const std::size_t d = F.dim;
  const std::size_t e = F.codim;
  Level2Path out = ito_integral;
  out.flavor = Flavor::stratonovich;
  const auto nodes = strat_lift.nodes();
  const Grid& grid = strat_lift.grid;
  const double h2 = 2.0 * hurst;

  Vec x(d);
  for (std::size_t k = 0; k < grid.n; ++k) {
    const double t_k = grid.time(k);
    const double dtau = std::pow(grid.time(k + 1), h2) - std::pow(t_k, h2);
    for (std::size_t c = 0; c < d; ++c) x[c] = nodes[k][c];
    const Mat f = F.value(x, t_k);
    const Tensor3 df = F.dx(x, t_k);

    auto y1 = out.inc_at(k);
    for (std::size_t a = 0; a < e; ++a) {
      double tr = 0.0;
      for (std::size_t m = 0; m < d; ++m) tr += df(a, m, m);
      y1[a] += 0.5 * tr * dtau;
    }
    auto y2 = out.lv2_at(k);
    for (std::size_t a = 0; a < e; ++a)
      for (std::size_t b = 0; b < e; ++b) {
        double ffT = 0.0;
        for (std::size_t m = 0; m < d; ++m) ffT += f(a, m) * f(b, m);
        y2[a * e + b] += 0.5 * ffT * dtau;
      }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Calculus identity residuals (the change-of-variable formula for both lifts)
// ---------------------------------------------------------------------------

/// One-form on the space-time extension whose integral realizes the lift of
/// the function F: value [DxF | DtF] with the spatial second derivative as
/// its compensation tensor. The output space is flattened to E = e * d with
/// index (a, k) -> a * d + k.
inline OneForm derivative_form(const OneForm& F) {
  if (!F.dxx) throw std::invalid_argument("derivative_form: F.dxx required");
  const std::size_t d = F.dim;
  const std::size_t e = F.codim;
  OneForm G;
  G.dim = d + 1;
  G.codim = e * d;
  G.time_dependent = false; // already a plain form on the extended space
  G.value = [F, d, e](const Vec& xt, double t) {
    Vec x(xt.begin(), xt.begin() + static_cast<std::ptrdiff_t>(d));
    const Tensor3 dfx = F.dx(x, t);
    Mat out(e * d, d + 1);
    for (std::size_t a = 0; a < e; ++a)
      for (std::size_t k = 0; k < d; ++k)
        for (std::size_t j = 0; j < d; ++j) out(a * d + k, j) = dfx(a, j, k);
    if (F.dt) {
      const Mat ft = F.dt(x, t);
      for (std::size_t a = 0; a < e; ++a)
        for (std::size_t k = 0; k < d; ++k) out(a * d + k, d) = ft(a, k);
    }
    return out;
  };
  G.dx = [F, d, e](const Vec& xt, double t) {
    Vec x(xt.begin(), xt.begin() + static_cast<std::ptrdiff_t>(d));
    const Tensor4 dxx = F.dxx(x, t);
    Tensor3 out(e * d, d + 1, d + 1);
    for (std::size_t a = 0; a < e; ++a)
      for (std::size_t k = 0; k < d; ++k)
        for (std::size_t i = 0; i < d; ++i)
          for (std::size_t j = 0; j < d; ++j) out(a * d + k, i, j) = dxx(a, i, j, k);
    return out;
  };
  return G;
}

struct ItoFormulaReport {
  std::vector<std::size_t> partition_sizes;
  std::vector<double> residual1;
  std::vector<double> residual2;
  double decay_rate1 = 0.0; // log2 slope of residual1 against partition size
  double decay_rate2 = 0.0;
};

namespace detail {

inline double fit_decay_rate(const std::vector<std::size_t>& sizes,
                             const std::vector<double>& res) {
  // least squares slope of -log2(res) against log2(size)
  std::size_t m = 0;
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t k = 0; k < sizes.size(); ++k) {
    if (!(res[k] > 0.0)) continue;
    const double xv = std::log2(static_cast<double>(sizes[k]));
    const double yv = -std::log2(res[k]);
    ++m;
    sx += xv;
    sy += yv;
    sxx += xv * xv;
    sxy += xv * yv;
  }
  if (m < 2) return std::numeric_limits<double>::infinity(); // residuals at zero
  const double denom = static_cast<double>(m) * sxx - sx * sx;
  return denom == 0.0 ? 0.0 : (static_cast<double>(m) * sxy - sx * sy) / denom;
}

} // namespace detail

/// Residuals of the change-of-variable identities for a function F of (B, t),
/// against both lifts of the same path, evaluated over [t0, t1] on a ladder
/// of partitions. residual1 checks the first-level identity
///   F(B_T, T) - F(B_0, 0) = int DF(Bt) dBt^1 + (1/2) int Dx^2 F du^{2H},
/// residual2 the second-level one (with its four Young correction terms).
inline ItoFormulaReport ito_formula_residual(const OneForm& F, const Level2Path& strat_lift,
                                             const Level2Path& ito_lift, double hurst,
                                             std::vector<std::size_t> strides = {16, 8, 4, 2, 1}) {
  const std::size_t d = F.dim;
  const std::size_t e = F.codim;
  const std::size_t E = e * d;
  const Grid& grid = strat_lift.grid;
  if (ito_lift.grid.n != grid.n)
    throw std::invalid_argument("ito_formula_residual: lifts must share the grid");

  const OneForm G = derivative_form(F);
  const Level2Path ext_s = lift_spacetime(strat_lift);
  const Level2Path ext_i = lift_spacetime(ito_lift);
  const auto nodes = strat_lift.nodes();

  ItoFormulaReport rep;
  std::sort(strides.begin(), strides.end(), std::greater<>());

  const double hurst2 = 2.0 * hurst;
  const auto tau = [hurst2](double t) { return std::pow(t, hurst2); };

  for (std::size_t stride : strides) {
    if (grid.n % stride != 0) continue;
    IntegrateOptions opt;
    opt.stride = stride;
    const Level2Path yi = integrate_one_form(G, ext_i, opt);
    const Level2Path ys = integrate_one_form(G, ext_s, opt);
    const std::size_t m = yi.grid.n;

    auto [i1, i2] = chen_reconstruct(yi, 0, m);
    auto [s1, s2] = chen_reconstruct(ys, 0, m);

    // flattened F values and trace of dxx at the partition nodes
    std::vector<Vec> fval(m + 1, Vec(E, 0.0));
    std::vector<Vec> trdxx(m + 1, Vec(E, 0.0));
    Vec x(d);
    for (std::size_t blk = 0; blk <= m; ++blk) {
      const std::size_t node = blk * stride;
      const double t = grid.time(node);
      for (std::size_t c = 0; c < d; ++c) x[c] = nodes[node][c];
      const Mat fv = F.value(x, t);
      const Tensor4 dxx = F.dxx(x, t);
      for (std::size_t a = 0; a < e; ++a)
        for (std::size_t k = 0; k < d; ++k) {
          fval[blk][a * d + k] = fv(a, k);
          double tr = 0.0;
          for (std::size_t i = 0; i < d; ++i) tr += dxx(a, i, i, k);
          trdxx[blk][a * d + k] = tr;
        }
    }

    // residual 1
    Vec young1(E, 0.0);
    for (std::size_t blk = 0; blk < m; ++blk) {
      const double dtau = tau(grid.time((blk + 1) * stride)) - tau(grid.time(blk * stride));
      axpy(0.5 * dtau, trdxx[blk], young1);
    }
    double r1 = 0.0;
    for (std::size_t c = 0; c < E; ++c)
      r1 = std::max(r1, std::abs(fval[m][c] - fval[0][c] - i1[c] - young1[c]));

    // residual 2: strat-side lift vs ito-side integral plus corrections
    Mat rhs = i2;
    Vec inner(E, 0.0); // int_0^u trace dxx dr^{2H}
    for (std::size_t blk = 0; blk < m; ++blk) {
      const double dtau = tau(grid.time((blk + 1) * stride)) - tau(grid.time(blk * stride));
      const std::size_t node = blk * stride;
      const double t = grid.time(node);
      for (std::size_t c = 0; c < d; ++c) x[c] = nodes[node][c];
      const Tensor3 dfx = F.dx(x, t);
      // (1/2) DF (x) DF du^{2H}, contracting the derivative slots
      for (std::size_t a = 0; a < e; ++a)
        for (std::size_t k = 0; k < d; ++k)
          for (std::size_t b = 0; b < e; ++b)
            for (std::size_t l = 0; l < d; ++l) {
              double s = 0.0;
              for (std::size_t j = 0; j < d; ++j) s += dfx(a, j, k) * dfx(b, j, l);
              rhs(a * d + k, b * d + l) += 0.5 * s * dtau;
            }
      for (std::size_t p = 0; p < E; ++p)
        for (std::size_t q = 0; q < E; ++q) {
          const double dF_q = fval[blk + 1][q] - fval[blk][q];
          rhs(p, q) += 0.5 * inner[p] * dF_q                            // (1/2) int (int dxx) (x) dF
                       + 0.5 * (fval[blk][p] - fval[0][p]) * trdxx[blk][q] * dtau
                       - 0.25 * inner[p] * trdxx[blk][q] * dtau;
        }
      axpy(dtau, trdxx[blk], inner);
    }
    double r2 = 0.0;
    for (std::size_t p = 0; p < E; ++p)
      for (std::size_t q = 0; q < E; ++q) r2 = std::max(r2, std::abs(s2(p, q) - rhs(p, q)));

    rep.partition_sizes.push_back(m);
    rep.residual1.push_back(r1);
    rep.residual2.push_back(r2);
  }

  rep.decay_rate1 = detail::fit_decay_rate(rep.partition_sizes, rep.residual1);
  rep.decay_rate2 = detail::fit_decay_rate(rep.partition_sizes, rep.residual2);
  return rep;
}

// ---------------------------------------------------------------------------
// Zero-mean Monte Carlo verification
// ---------------------------------------------------------------------------

struct ZeroMeanReport {
  Vec mean;
  Vec se;
  bool pass = false;
  bool degenerate = false;
  std::size_t paths = 0;
};

/// Report from per-path level-1 samples (count x e, row per path). A zero SE
/// against a nonzero mean marks a degenerate integrand.
inline ZeroMeanReport zero_mean_report(std::span<const double> samples, std::size_t e) {
  if (e == 0 || samples.size() % e != 0)
    throw std::invalid_argument("zero_mean_report: bad sample layout");
  const std::size_t count = samples.size() / e;
  ZeroMeanReport rep;
  rep.paths = count;
  rep.mean.assign(e, 0.0);
  rep.se.assign(e, 0.0);
  bool pass = true;
  bool degenerate = false;
  std::vector<double> comp(count);
  for (std::size_t c = 0; c < e; ++c) {
    for (std::size_t p = 0; p < count; ++p) comp[p] = samples[p * e + c];
    const MeanSe ms = mean_and_se(comp);
    rep.mean[c] = ms.mean;
    rep.se[c] = ms.se;
    if (ms.se == 0.0) {
      if (ms.mean != 0.0) {
        degenerate = true;
        pass = false;
      }
    } else if (!(std::abs(ms.mean) < 3.0 * ms.se)) {
      pass = false;
    }
  }
  rep.pass = pass;
  rep.degenerate = degenerate;
  return rep;
}

/// Monte Carlo estimate of E[ int_0^T F(B, u) dB ]^1 over `count` paths.
/// Pass iff |mean| < 3 se componentwise. flavor selects the lift; the ito
/// flavor is the one with the zero-mean property, the stratonovich flavor is
/// kept for contrast experiments.
inline ZeroMeanReport zero_mean_verify(const OneForm& F, const FbmModel& model, const Grid& grid,
                                       std::size_t count, std::uint64_t seed,
                                       Flavor flavor = Flavor::ito, std::size_t workers = 1) {
  if (count < 2) throw std::invalid_argument("zero_mean_verify: need at least 2 paths");
  const std::size_t e = F.codim;
  std::vector<double> samples(count * e, 0.0);

  parallel_for(count, workers, [&](std::size_t p) {
    const FbmPath path = sample_path(model, grid, seed, p);
    const Level2Path lift =
        flavor == Flavor::ito ? lift_ito(path) : lift_stratonovich(path);
    const Level2Path y = integrate_one_form(F, lift);
    auto [lvl1, lvl2] = chen_reconstruct(y, 0, y.grid.n);
    for (std::size_t c = 0; c < e; ++c) samples[p * e + c] = lvl1[c];
  });

  return zero_mean_report(samples, e);
}

} // namespace roughfbm
