#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "transferlab/errors.hpp"
#include "transferlab/matrix.hpp"

namespace transferlab {

struct EigResult {
  std::vector<double> values;  // ascending
  Matrix vectors;              // unitary; column k pairs with values[k]
};

/*
 * Cyclic Jacobi for complex Hermitian matrices.  One rotation zeroes the
 * (p, q) entry: the phase of a_pq is factored out, the remaining real 2x2
 * problem is solved by the classical tangent formula, and the combined
 * unitary is applied to rows/columns p, q only.  Sweeps run in fixed
 * row-major pivot order; iteration stops when every off-diagonal magnitude
 * falls below 1e-13 * ||A||_F.
 */
namespace detail {

inline constexpr double kJacobiRelThreshold = 1e-13;
inline constexpr int kJacobiMaxSweeps = 100;

inline void jacobi_rotate(Matrix& a, Matrix* v, int p, int q, double c, cplx s_ph) {
  const int n = a.rows();
  const cplx s_ph_conj = std::conj(s_ph);
  for (int i = 0; i < n; ++i) {  // A <- A R
    const cplx aip = a(i, p), aiq = a(i, q);
    a(i, p) = c * aip - s_ph_conj * aiq;
    a(i, q) = s_ph * aip + c * aiq;
  }
  for (int j = 0; j < n; ++j) {  // A <- R* A
    const cplx apj = a(p, j), aqj = a(q, j);
    a(p, j) = c * apj - s_ph * aqj;
    a(q, j) = s_ph_conj * apj + c * aqj;
  }
  if (v) {
    for (int i = 0; i < v->rows(); ++i) {
      const cplx vip = (*v)(i, p), viq = (*v)(i, q);
      (*v)(i, p) = c * vip - s_ph_conj * viq;
      (*v)(i, q) = s_ph * vip + c * viq;
    }
  }
}

inline void jacobi_diagonalize(Matrix& a, Matrix* v) {
  const int n = a.rows();
  const double thresh = kJacobiRelThreshold * std::max(a.frobenius_norm(), 1e-300);
  for (int sweep = 0; sweep < kJacobiMaxSweeps; ++sweep) {
    int rotations = 0;
    for (int p = 0; p < n - 1; ++p) {
      for (int q = p + 1; q < n; ++q) {
        const double beta = std::abs(a(p, q));
        if (beta <= thresh) continue;
        ++rotations;
        const cplx ph = a(p, q) / beta;
        const double app = a(p, p).real(), aqq = a(q, q).real();
        const double theta = (aqq - app) / (2.0 * beta);
        double t;
        if (std::abs(theta) > 1e12) {
          t = 0.5 / theta;
        } else {
          t = (theta >= 0.0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(1.0 + theta * theta));
        }
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = t * c;
        // rotation columns: R[:,p] = (c, -s*conj(ph)), R[:,q] = (s, c*conj(ph))
        jacobi_rotate(a, v, p, q, c, s * ph);
        a(p, q) = 0.0;
        a(q, p) = 0.0;
        a(p, p) = a(p, p).real();
        a(q, q) = a(q, q).real();
      }
    }
    if (rotations == 0) return;
  }
  throw structural_error("jacobi eigensolver failed to converge");
}

}  // namespace detail

/// Eigendecomposition of the Hermitian part of `a`.
inline EigResult hermitian_eig(const Matrix& a, bool want_vectors = true) {
  if (a.rows() != a.cols()) throw input_error("hermitian_eig: matrix not square");
  const int n = a.rows();
  Matrix w(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) w(i, j) = 0.5 * (a(i, j) + std::conj(a(j, i)));
  Matrix vecs = want_vectors ? Matrix::identity(n) : Matrix();
  detail::jacobi_diagonalize(w, want_vectors ? &vecs : nullptr);

  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](int i, int j) { return w(i, i).real() < w(j, j).real(); });

  EigResult r;
  r.values.resize(n);
  for (int k = 0; k < n; ++k) r.values[k] = w(order[k], order[k]).real();
  if (want_vectors) {
    r.vectors = Matrix(n, n);
    for (int k = 0; k < n; ++k) r.vectors.set_col(k, vecs.col(order[k]));
  }
  return r;
}

inline double min_eigenvalue(const Matrix& a) {
  if (a.rows() == 0) return 0.0;
  return hermitian_eig(a, /*want_vectors=*/false).values.front();
}

inline double max_eigenvalue(const Matrix& a) {
  if (a.rows() == 0) return 0.0;
  return hermitian_eig(a, /*want_vectors=*/false).values.back();
}

/// LL* factorization attempt; true iff every pivot stays strictly positive.
/// Success certifies positive definiteness of the Hermitian part.
inline bool cholesky_succeeds(const Matrix& a) {
  const int n = a.rows();
  Matrix l(n, n);
  for (int j = 0; j < n; ++j) {
    double d = a(j, j).real();
    for (int k = 0; k < j; ++k) d -= std::norm(l(j, k));
    if (!(d > 0.0)) return false;
    const double ljj = std::sqrt(d);
    l(j, j) = ljj;
    for (int i = j + 1; i < n; ++i) {
      cplx s = 0.5 * (a(i, j) + std::conj(a(j, i)));
      for (int k = 0; k < j; ++k) s -= l(i, k) * std::conj(l(j, k));
      l(i, j) = s / ljj;
    }
  }
  return true;
}

/// Is the Hermitian matrix `a` positive semidefinite to tolerance?
/// Fast path: Cholesky of a + tol*I certifies min eig > -tol; on failure the
/// exact minimal eigenvalue is computed.
inline bool is_psd(const Matrix& a, double tol) {
  if (a.rows() == 0) return true;
  Matrix shifted = a;
  for (int i = 0; i < a.rows(); ++i) shifted(i, i) += tol;
  if (cholesky_succeeds(shifted)) return true;
  return min_eigenvalue(a) >= -tol;
}

}  // namespace transferlab
