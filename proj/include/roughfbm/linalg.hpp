#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

#include "roughfbm/core.hpp"

namespace roughfbm {

// Small dense row-major matrix. Dimensions here are the path dimension d and
// the one-form codomain e, both single digits in practice, so no attempt is
// made at being clever.
struct Mat {
  std::size_t rows = 0, cols = 0;
  std::vector<double> a;

  Mat() = default;
  Mat(std::size_t r, std::size_t c) : rows(r), cols(c), a(r * c, 0.0) {}

  double& operator()(std::size_t i, std::size_t j) { return a[i * cols + j]; }
  double operator()(std::size_t i, std::size_t j) const { return a[i * cols + j]; }

  static Mat identity(std::size_t n) {
    Mat m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
  }

  Mat& operator+=(const Mat& o) {
    for (std::size_t i = 0; i < a.size(); ++i) a[i] += o.a[i];
    return *this;
  }
  Mat& operator-=(const Mat& o) {
    for (std::size_t i = 0; i < a.size(); ++i) a[i] -= o.a[i];
    return *this;
  }
  Mat& operator*=(double s) {
    for (double& x : a) x *= s;
    return *this;
  }

  double frobenius() const {
    double s = 0;
    for (double x : a) s += x * x;
    return std::sqrt(s);
  }
};

inline Mat operator+(Mat m, const Mat& o) { m += o; return m; }
inline Mat operator-(Mat m, const Mat& o) { m -= o; return m; }
inline Mat operator*(double s, Mat m) { m *= s; return m; }

// out(i,j) += u_i v_j
inline void add_outer(Mat& out, std::span<const double> u, std::span<const double> v) {
  for (std::size_t i = 0; i < u.size(); ++i)
    for (std::size_t j = 0; j < v.size(); ++j) out(i, j) += u[i] * v[j];
}

inline Mat outer(std::span<const double> u, std::span<const double> v) {
  Mat m(u.size(), v.size());
  add_outer(m, u, v);
  return m;
}

inline double dot(std::span<const double> u, std::span<const double> v) {
  double s = 0;
  for (std::size_t i = 0; i < u.size(); ++i) s += u[i] * v[i];
  return s;
}

inline double norm2(std::span<const double> u) { return std::sqrt(dot(u, u)); }

inline void axpy(double alpha, std::span<const double> x, std::span<double> y) {
  for (std::size_t i = 0; i < x.size(); ++i) y[i] += alpha * x[i];
}

// Order-3 tensor, layout (n0, n1, n2). Used for one-form derivatives with the
// convention T(a, j, k) = d_{x_j} F[a, k]: the derivative index j is the one
// contracted against the first slot of a second-level tensor.
struct Tensor3 {
  std::size_t n0 = 0, n1 = 0, n2 = 0;
  std::vector<double> a;

  Tensor3() = default;
  Tensor3(std::size_t m0, std::size_t m1, std::size_t m2)
      : n0(m0), n1(m1), n2(m2), a(m0 * m1 * m2, 0.0) {}

  double& operator()(std::size_t i, std::size_t j, std::size_t k) {
    return a[(i * n1 + j) * n2 + k];
  }
  double operator()(std::size_t i, std::size_t j, std::size_t k) const {
    return a[(i * n1 + j) * n2 + k];
  }
};

// Order-4 tensor, layout (n0, n1, n2, n3); second derivatives of one-forms with
// T(a, i, j, k) = d_{x_i} d_{x_j} F[a, k].
struct Tensor4 {
  std::size_t n0 = 0, n1 = 0, n2 = 0, n3 = 0;
  std::vector<double> a;

  Tensor4() = default;
  Tensor4(std::size_t m0, std::size_t m1, std::size_t m2, std::size_t m3)
      : n0(m0), n1(m1), n2(m2), n3(m3), a(m0 * m1 * m2 * m3, 0.0) {}

  double& operator()(std::size_t i, std::size_t j, std::size_t k, std::size_t l) {
    return a[((i * n1 + j) * n2 + k) * n3 + l];
  }
  double operator()(std::size_t i, std::size_t j, std::size_t k, std::size_t l) const {
    return a[((i * n1 + j) * n2 + k) * n3 + l];
  }
};

// Cholesky factorization in place of a symmetric positive definite matrix
// stored row-major; returns false if a non-positive pivot is met.
inline bool cholesky_in_place(std::vector<double>& m, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j <= i; ++j) {
      double s = m[i * n + j];
      for (std::size_t k = 0; k < j; ++k) s -= m[i * n + k] * m[j * n + k];
      if (i == j) {
        if (s <= 0.0) return false;
        m[i * n + i] = std::sqrt(s);
      } else {
        m[i * n + j] = s / m[j * n + j];
      }
    }
    for (std::size_t j = i + 1; j < n; ++j) m[i * n + j] = 0.0;
  }
  return true;
}

} // namespace roughfbm
