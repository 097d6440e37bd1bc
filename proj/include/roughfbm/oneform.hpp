#pragma once

#include <cmath>
#include <functional>
#include <stdexcept>
#include <string>

#include "roughfbm/core.hpp"
#include "roughfbm/linalg.hpp"

namespace roughfbm {

/// Smooth one-form F: R^d -> L(R^d, R^e), optionally time dependent.
/// Callbacks:
///   value(x, t)  e x d matrix F
///   dx(x, t)     Tensor3 with dx(a, j, k) = d_{x_j} F[a, k]
///   dxx(x, t)    Tensor4 with dxx(a, i, j, k) = d_{x_i} d_{x_j} F[a, k] (optional;
///                needed only by the calculus-identity machinery)
///   dt(x, t)     e x d matrix of time derivatives (optional)
/// Derivatives are supplied by the caller, not differentiated automatically;
/// tests cross-check them against finite differences.
struct OneForm {
  std::size_t dim = 1;   // d
  std::size_t codim = 1; // e
  bool time_dependent = false;

  std::function<Mat(const Vec&, double)> value;
  std::function<Tensor3(const Vec&, double)> dx;
  std::function<Tensor4(const Vec&, double)> dxx;
  std::function<Mat(const Vec&, double)> dt;
};

// ---- scalar (d = e = 1) helpers -------------------------------------------

/// Build a 1-d one-form from scalar callbacks f, f', f'' (f'' may be null when
/// the form is only integrated, not lifted).
inline OneForm scalar_form(std::function<double(double)> f, std::function<double(double)> df,
                           std::function<double(double)> d2f = nullptr) {
  OneForm F;
  F.dim = F.codim = 1;
  F.value = [f](const Vec& x, double) {
    Mat m(1, 1);
    m(0, 0) = f(x[0]);
    return m;
  };
  F.dx = [df](const Vec& x, double) {
    Tensor3 t(1, 1, 1);
    t(0, 0, 0) = df(x[0]);
    return t;
  };
  if (d2f) {
    F.dxx = [d2f](const Vec& x, double) {
      Tensor4 t(1, 1, 1, 1);
      t(0, 0, 0, 0) = d2f(x[0]);
      return t;
    };
  }
  return F;
}

/// Scalar time-dependent form f(x, t) with all partials supplied.
inline OneForm scalar_time_form(std::function<double(double, double)> f,
                                std::function<double(double, double)> fx,
                                std::function<double(double, double)> fxx = nullptr,
                                std::function<double(double, double)> ft = nullptr) {
  OneForm F;
  F.dim = F.codim = 1;
  F.time_dependent = true;
  F.value = [f](const Vec& x, double t) {
    Mat m(1, 1);
    m(0, 0) = f(x[0], t);
    return m;
  };
  F.dx = [fx](const Vec& x, double t) {
    Tensor3 out(1, 1, 1);
    out(0, 0, 0) = fx(x[0], t);
    return out;
  };
  if (fxx) {
    F.dxx = [fxx](const Vec& x, double t) {
      Tensor4 out(1, 1, 1, 1);
      out(0, 0, 0, 0) = fxx(x[0], t);
      return out;
    };
  }
  if (ft) {
    F.dt = [ft](const Vec& x, double t) {
      Mat m(1, 1);
      m(0, 0) = ft(x[0], t);
      return m;
    };
  }
  return F;
}

// ---- builtins ---------------------------------------------------------------

inline OneForm constant_form(double c) {
  return scalar_form([c](double) { return c; }, [](double) { return 0.0; },
                     [](double) { return 0.0; });
}

inline OneForm identity_form() {
  return scalar_form([](double x) { return x; }, [](double) { return 1.0; },
                     [](double) { return 0.0; });
}

inline OneForm square_form() {
  return scalar_form([](double x) { return x * x; }, [](double x) { return 2.0 * x; },
                     [](double) { return 2.0; });
}

inline OneForm sine_form() {
  return scalar_form([](double x) { return std::sin(x); }, [](double x) { return std::cos(x); },
                     [](double x) { return -std::sin(x); });
}

/// f(x) = sum_k c_k x^k with symbolic derivatives.
inline OneForm poly_form(std::vector<double> coeffs) {
  auto eval = [](const std::vector<double>& c, double x) {
    double s = 0;
    for (std::size_t k = c.size(); k-- > 0;) s = s * x + c[k];
    return s;
  };
  auto deriv = [](const std::vector<double>& c) {
    std::vector<double> d;
    for (std::size_t k = 1; k < c.size(); ++k) d.push_back(c[k] * static_cast<double>(k));
    return d;
  };
  std::vector<double> d1 = deriv(coeffs);
  std::vector<double> d2 = deriv(d1);
  return scalar_form([coeffs, eval](double x) { return eval(coeffs, x); },
                     [d1, eval](double x) { return eval(d1, x); },
                     [d2, eval](double x) { return eval(d2, x); });
}

/// f(x, t) = x t, the simplest genuinely time-dependent form.
inline OneForm xt_form() {
  return scalar_time_form([](double x, double t) { return x * t; },
                          [](double, double t) { return t; }, [](double, double) { return 0.0; },
                          [](double x, double) { return x; });
}

/// A smooth 2-d matrix form for multi-dimensional tests:
/// F(x) = [[sin x2, cos x1], [x1, x2^2/2]].
inline OneForm swirl_form_2d() {
  OneForm F;
  F.dim = F.codim = 2;
  F.value = [](const Vec& x, double) {
    Mat m(2, 2);
    m(0, 0) = std::sin(x[1]);
    m(0, 1) = std::cos(x[0]);
    m(1, 0) = x[0];
    m(1, 1) = 0.5 * x[1] * x[1];
    return m;
  };
  F.dx = [](const Vec& x, double) {
    Tensor3 t(2, 2, 2);
    // t(a, j, k) = d_{x_j} F[a, k]
    t(0, 1, 0) = std::cos(x[1]);
    t(0, 0, 1) = -std::sin(x[0]);
    t(1, 0, 0) = 1.0;
    t(1, 1, 1) = x[1];
    return t;
  };
  F.dxx = [](const Vec& x, double) {
    Tensor4 t(2, 2, 2, 2);
    t(0, 1, 1, 0) = -std::sin(x[1]);
    t(0, 0, 0, 1) = -std::cos(x[0]);
    t(1, 1, 1, 1) = 1.0;
    return t;
  };
  return F;
}

inline OneForm builtin_form(const std::string& name) {
  if (name == "constant") return constant_form(1.0);
  if (name == "identity") return identity_form();
  if (name == "square") return square_form();
  if (name == "sine") return sine_form();
  if (name == "xt") return xt_form();
  throw std::invalid_argument("unknown builtin one-form: " + name);
}

} // namespace roughfbm
