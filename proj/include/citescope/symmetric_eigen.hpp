#pragma once

// Full eigendecomposition of a real symmetric matrix by cyclic Jacobi
// rotations.

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "citescope/matrix.hpp"

namespace citescope {

struct EigenOptions {
  double tolerance = 1e-10;  // on the off-diagonal norm, relative to ‖A‖_F
  int max_sweeps = 100;
};

struct SymmetricEigen {
  std::vector<double> values;  // descending (algebraic)
  Matrix vectors;              // column k pairs with values[k]
  int sweeps = 0;
  double off_norm = 0.0;  // final off-diagonal Frobenius norm
};

// Flips each eigenvector so its largest-magnitude component (first on ties)
// is non-negative.
inline void normalize_signs(Matrix& vectors) {
  for (std::size_t k = 0; k < vectors.cols(); ++k) {
    std::size_t arg = 0;
    for (std::size_t i = 1; i < vectors.rows(); ++i) {
      if (std::abs(vectors(i, k)) > std::abs(vectors(arg, k))) arg = i;
    }
    if (vectors.rows() && vectors(arg, k) < 0.0) {
      for (std::size_t i = 0; i < vectors.rows(); ++i) vectors(i, k) = -vectors(i, k);
    }
  }
}

inline SymmetricEigen symmetric_eigen(Matrix a, const EigenOptions& opt = {}) {
  const std::size_t n = a.rows();
  if (a.cols() != n) throw ArgumentError("eigendecomposition needs a square matrix");
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      if (std::abs(a(i, j) - a(j, i)) > 1e-12 * (std::abs(a(i, j)) + std::abs(a(j, i)) + 1e-300)) {
        throw ArgumentError("matrix is not symmetric");
      }

  Matrix v = Matrix::identity(n);
  double frob = 0.0;
  for (double x : a.data()) frob += x * x;
  frob = std::sqrt(frob);

  auto off = [&] {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j) s += 2.0 * a(i, j) * a(i, j);
    return std::sqrt(s);
  };

  SymmetricEigen out;
  // Sweep until the off-diagonal mass is far below the tolerance, or until it
  // stops shrinking once the tolerance itself is met (rounding floor).
  const double loose = std::max(opt.tolerance * frob, 1e-300);
  const double tight = 1e-2 * loose;
  double off_norm = off();
  while (off_norm > tight) {
    if (out.sweeps >= opt.max_sweeps) {
      if (off_norm <= loose) break;
      throw ConvergenceError("Jacobi eigensolver did not converge", off_norm / std::max(frob, 1e-300));
    }
    ++out.sweeps;
    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const double apq = a(p, q);
        if (apq == 0.0) continue;
        const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
        const double t = (theta >= 0.0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (std::size_t k = 0; k < n; ++k) {
          const double akp = a(k, p), akq = a(k, q);
          a(k, p) = c * akp - s * akq;
          a(k, q) = s * akp + c * akq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double apk = a(p, k), aqk = a(q, k);
          a(p, k) = c * apk - s * aqk;
          a(q, k) = s * apk + c * aqk;
        }
        a(p, q) = a(q, p) = 0.0;
        for (std::size_t k = 0; k < n; ++k) {
          const double vkp = v(k, p), vkq = v(k, q);
          v(k, p) = c * vkp - s * vkq;
          v(k, q) = s * vkp + c * vkq;
        }
      }
    }
    const double before = off_norm;
    off_norm = off();
    if (off_norm <= loose && off_norm > 0.5 * before) break;
  }
  out.off_norm = off_norm;

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](auto x, auto y) { return a(x, x) > a(y, y); });
  out.vectors = Matrix(n, n);
  for (std::size_t k = 0; k < n; ++k) {
    out.values.push_back(a(order[k], order[k]));
    for (std::size_t i = 0; i < n; ++i) out.vectors(i, k) = v(i, order[k]);
  }
  normalize_signs(out.vectors);
  return out;
}

// max_i |(A x)_i - λ x_i| for eigenvector column k.
inline double eigen_residual(const Matrix& a, const SymmetricEigen& e, std::size_t k) {
  double worst = 0.0;
  for (std::size_t i = 0; i < a.rows(); ++i) {
    double ax = 0.0;
    for (std::size_t j = 0; j < a.cols(); ++j) ax += a(i, j) * e.vectors(j, k);
    worst = std::max(worst, std::abs(ax - e.values[k] * e.vectors(i, k)));
  }
  return worst;
}

}  // namespace citescope
