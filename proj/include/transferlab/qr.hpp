#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "transferlab/errors.hpp"
#include "transferlab/matrix.hpp"

namespace transferlab {

/// Householder QR with column pivoting.  Rank decisions, orthonormal range
/// bases, null-space dimensions and least-squares solves all come from here.
class PivotedQR {
public:
  explicit PivotedQR(const Matrix& a) : m_(a.rows()), n_(a.cols()), k_(std::min(m_, n_)) {
    Matrix w = a;
    perm_.resize(n_);
    for (int j = 0; j < n_; ++j) perm_[j] = j;
    v_ = Matrix(m_, k_);
    vnorm2_.assign(k_, 0.0);
    r_ = Matrix(k_, n_);

    for (int k = 0; k < k_; ++k) {
      int pivot = k;
      double best = -1.0;
      for (int j = k; j < n_; ++j) {
        double s = 0.0;
        for (int i = k; i < m_; ++i) s += std::norm(w(i, j));
        if (s > best) {
          best = s;
          pivot = j;
        }
      }
      if (pivot != k) {
        for (int i = 0; i < m_; ++i) std::swap(w(i, k), w(i, pivot));
        std::swap(perm_[k], perm_[pivot]);
        for (int i = 0; i < k; ++i) std::swap(r_(i, k), r_(i, pivot));
      }

      double normx = std::sqrt(std::max(best, 0.0));
      if (normx > 0.0) {
        const cplx x0 = w(k, k);
        const cplx ph = (x0 == cplx(0.0)) ? cplx(1.0) : x0 / std::abs(x0);
        double vn2 = 0.0;
        v_(k, k) = x0 + ph * normx;
        vn2 += std::norm(v_(k, k));
        for (int i = k + 1; i < m_; ++i) {
          v_(i, k) = w(i, k);
          vn2 += std::norm(v_(i, k));
        }
        vnorm2_[k] = vn2;
        if (vn2 > 0.0) {
          for (int j = k; j < n_; ++j) {
            cplx dot = 0.0;
            for (int i = k; i < m_; ++i) dot += std::conj(v_(i, k)) * w(i, j);
            const cplx f = 2.0 * dot / vn2;
            for (int i = k; i < m_; ++i) w(i, j) -= f * v_(i, k);
          }
        }
        w(k, k) = -ph * normx;
      }
      for (int j = k; j < n_; ++j) r_(k, j) = w(k, j);
    }
  }

  int rows() const { return m_; }
  int cols() const { return n_; }

  /// Original column index chosen as pivot at step k.
  int pivot(int k) const { return perm_[k]; }

  double rdiag(int k) const { return std::abs(r_(k, k)); }

  /// Numerical rank: count of |R(k,k)| above the absolute threshold.
  int rank(double threshold) const {
    int r = 0;
    while (r < k_ && rdiag(r) > threshold) ++r;
    return r;
  }

  /// Relative-threshold rank: threshold = rel * |R(0,0)|.
  int rank_rel(double rel) const {
    if (k_ == 0 || rdiag(0) == 0.0) return 0;
    return rank(rel * rdiag(0));
  }

  /// Q* b in place.
  void apply_q_adjoint(Matrix& b) const {
    for (int k = 0; k < k_; ++k) {
      if (vnorm2_[k] == 0.0) continue;
      for (int j = 0; j < b.cols(); ++j) {
        cplx dot = 0.0;
        for (int i = k; i < m_; ++i) dot += std::conj(v_(i, k)) * b(i, j);
        const cplx f = 2.0 * dot / vnorm2_[k];
        for (int i = k; i < m_; ++i) b(i, j) -= f * v_(i, k);
      }
    }
  }

  /// First `r` columns of Q: an orthonormal basis of the range.
  Matrix q_columns(int r) const {
    Matrix q(m_, r);
    for (int j = 0; j < r; ++j) q(j, j) = 1.0;
    for (int k = k_ - 1; k >= 0; --k) {
      if (vnorm2_[k] == 0.0) continue;
      for (int j = 0; j < r; ++j) {
        cplx dot = 0.0;
        for (int i = k; i < m_; ++i) dot += std::conj(v_(i, k)) * q(i, j);
        const cplx f = 2.0 * dot / vnorm2_[k];
        for (int i = k; i < m_; ++i) q(i, j) -= f * v_(i, k);
      }
    }
    return q;
  }

  /// Basic least-squares solution (free variables after `rank` set to zero).
  Matrix solve(const Matrix& b, int rank) const {
    if (b.rows() != m_) throw input_error("PivotedQR::solve: rhs shape mismatch");
    Matrix y = b;
    apply_q_adjoint(y);
    Matrix x(n_, b.cols());
    for (int col = 0; col < b.cols(); ++col) {
      for (int k = rank - 1; k >= 0; --k) {
        cplx s = y(k, col);
        for (int j = k + 1; j < rank; ++j) s -= r_(k, j) * x(perm_[j], col);
        x(perm_[k], col) = s / r_(k, k);
      }
    }
    return x;
  }

private:
  int m_, n_, k_;
  Matrix v_;                   // Householder vectors, column k live in rows k..m-1
  std::vector<double> vnorm2_;
  Matrix r_;                   // upper trapezoid, columns in pivot order
  std::vector<int> perm_;
};

/// Orthonormal basis of the column span, rank decided at `threshold` times
/// the leading pivot magnitude.
inline Matrix orthonormal_range(const Matrix& a, double threshold = 1e-12) {
  PivotedQR qr(a);
  return qr.q_columns(qr.rank_rel(threshold));
}

struct LstsqResult {
  Matrix x;
  double residual;  // ||a x - b||_F
};

inline LstsqResult least_squares(const Matrix& a, const Matrix& b, double rank_rel = 1e-12) {
  PivotedQR qr(a);
  LstsqResult out;
  out.x = qr.solve(b, qr.rank_rel(rank_rel));
  out.residual = (a * out.x - b).frobenius_norm();
  return out;
}

/// Frobenius distance between the orthogonal projectors of two subspaces
/// given by orthonormal bases (equal spans give ~0).
inline double subspace_distance(const Matrix& q1, const Matrix& q2) {
  if (q1.rows() != q2.rows()) throw input_error("subspace_distance: ambient mismatch");
  const int m = q1.rows();
  double s = 0.0;
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j) {
      cplx p1 = 0.0, p2 = 0.0;
      for (int k = 0; k < q1.cols(); ++k) p1 += q1(i, k) * std::conj(q1(j, k));
      for (int k = 0; k < q2.cols(); ++k) p2 += q2(i, k) * std::conj(q2(j, k));
      s += std::norm(p1 - p2);
    }
  return std::sqrt(s);
}

/// Distance from v to the span of the orthonormal columns of q.
inline double distance_to_span(const Matrix& q, const Matrix& v) {
  Matrix proj(v.rows(), v.cols());
  for (int c = 0; c < v.cols(); ++c) {
    for (int k = 0; k < q.cols(); ++k) {
      cplx dot = 0.0;
      for (int i = 0; i < q.rows(); ++i) dot += std::conj(q(i, k)) * v(i, c);
      for (int i = 0; i < q.rows(); ++i) proj(i, c) += dot * q(i, k);
    }
  }
  return (v - proj).frobenius_norm();
}

}  // namespace transferlab
