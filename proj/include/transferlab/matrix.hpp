#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <initializer_list>
#include <vector>

#include "transferlab/errors.hpp"

namespace transferlab {

using cplx = std::complex<double>;

/// Dense complex matrix, row-major.  Sized for desk-scale work (dims <= a few
/// hundred); everything is plain loops, no external linear algebra.
class Matrix {
public:
  Matrix() = default;
  Matrix(int rows, int cols) : rows_(rows), cols_(cols) {
    if (rows < 0 || cols < 0) throw input_error("Matrix: negative dimension");
    a_.resize(static_cast<size_t>(rows) * cols);
  }

  Matrix(std::initializer_list<std::initializer_list<cplx>> init) {
    rows_ = static_cast<int>(init.size());
    cols_ = rows_ ? static_cast<int>(init.begin()->size()) : 0;
    a_.reserve(static_cast<size_t>(rows_) * cols_);
    for (const auto& row : init) {
      if (static_cast<int>(row.size()) != cols_) throw input_error("Matrix: ragged initializer");
      a_.insert(a_.end(), row.begin(), row.end());
    }
  }

  static Matrix identity(int n) {
    Matrix m(n, n);
    for (int i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
  }

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  bool empty() const { return a_.empty(); }

  cplx& operator()(int i, int j) { return a_[static_cast<size_t>(i) * cols_ + j]; }
  const cplx& operator()(int i, int j) const { return a_[static_cast<size_t>(i) * cols_ + j]; }

  Matrix& operator+=(const Matrix& o) {
    check_same_shape(o, "+=");
    for (size_t k = 0; k < a_.size(); ++k) a_[k] += o.a_[k];
    return *this;
  }
  Matrix& operator-=(const Matrix& o) {
    check_same_shape(o, "-=");
    for (size_t k = 0; k < a_.size(); ++k) a_[k] -= o.a_[k];
    return *this;
  }
  Matrix& operator*=(cplx s) {
    for (auto& z : a_) z *= s;
    return *this;
  }

  friend Matrix operator+(Matrix a, const Matrix& b) { return a += b; }
  friend Matrix operator-(Matrix a, const Matrix& b) { return a -= b; }
  friend Matrix operator*(Matrix a, cplx s) { return a *= s; }
  friend Matrix operator*(cplx s, Matrix a) { return a *= s; }

  friend Matrix operator*(const Matrix& a, const Matrix& b) {
    if (a.cols_ != b.rows_) throw input_error("Matrix: product shape mismatch");
    Matrix c(a.rows_, b.cols_);
    size_t nnz = 0;
    for (const auto& z : b.a_) nnz += (z != cplx(0.0));
    if (4 * nnz < b.a_.size()) {  // sparse right factor: iterate its nonzeros
      for (int k = 0; k < b.rows_; ++k)
        for (int j = 0; j < b.cols_; ++j) {
          const cplx bkj = b(k, j);
          if (bkj == cplx(0.0)) continue;
          for (int i = 0; i < a.rows_; ++i) c(i, j) += a(i, k) * bkj;
        }
      return c;
    }
    for (int i = 0; i < a.rows_; ++i)
      for (int k = 0; k < a.cols_; ++k) {
        const cplx aik = a(i, k);
        if (aik == cplx(0.0)) continue;
        for (int j = 0; j < b.cols_; ++j) c(i, j) += aik * b(k, j);
      }
    return c;
  }

  Matrix adjoint() const {
    Matrix m(cols_, rows_);
    for (int i = 0; i < rows_; ++i)
      for (int j = 0; j < cols_; ++j) m(j, i) = std::conj((*this)(i, j));
    return m;
  }

  Matrix transpose() const {
    Matrix m(cols_, rows_);
    for (int i = 0; i < rows_; ++i)
      for (int j = 0; j < cols_; ++j) m(j, i) = (*this)(i, j);
    return m;
  }

  Matrix conjugate() const {
    Matrix m = *this;
    for (auto& z : m.a_) z = std::conj(z);
    return m;
  }

  cplx trace() const {
    cplx t = 0.0;
    for (int i = 0; i < std::min(rows_, cols_); ++i) t += (*this)(i, i);
    return t;
  }

  double frobenius_norm() const {
    double s = 0.0;
    for (const auto& z : a_) s += std::norm(z);
    return std::sqrt(s);
  }

  double max_abs() const {
    double m = 0.0;
    for (const auto& z : a_) m = std::max(m, std::abs(z));
    return m;
  }

  bool is_hermitian(double tol) const {
    if (rows_ != cols_) return false;
    for (int i = 0; i < rows_; ++i)
      for (int j = i; j < cols_; ++j)
        if (std::abs((*this)(i, j) - std::conj((*this)(j, i))) > tol) return false;
    return true;
  }

  Matrix col(int j) const {
    Matrix v(rows_, 1);
    for (int i = 0; i < rows_; ++i) v(i, 0) = (*this)(i, j);
    return v;
  }

  void set_col(int j, const Matrix& v) {
    for (int i = 0; i < rows_; ++i) (*this)(i, j) = v(i, 0);
  }

  Matrix block(int i0, int j0, int r, int c) const {
    Matrix m(r, c);
    for (int i = 0; i < r; ++i)
      for (int j = 0; j < c; ++j) m(i, j) = (*this)(i0 + i, j0 + j);
    return m;
  }

  void set_block(int i0, int j0, const Matrix& m) {
    for (int i = 0; i < m.rows(); ++i)
      for (int j = 0; j < m.cols(); ++j) (*this)(i0 + i, j0 + j) = m(i, j);
  }

  const std::vector<cplx>& data() const { return a_; }

private:
  void check_same_shape(const Matrix& o, const char* op) const {
    if (rows_ != o.rows_ || cols_ != o.cols_)
      throw input_error(std::string("Matrix: shape mismatch in ") + op);
  }

  int rows_ = 0;
  int cols_ = 0;
  std::vector<cplx> a_;
};

inline double distance_max_abs(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw input_error("distance_max_abs: shape mismatch");
  double m = 0.0;
  for (int i = 0; i < a.rows(); ++i)
    for (int j = 0; j < a.cols(); ++j) m = std::max(m, std::abs(a(i, j) - b(i, j)));
  return m;
}

/// Largest singular value, estimated by power iteration on A*A.  The start
/// vector leads with the heaviest column plus a fixed phase spread (a uniform
/// start can be exactly orthogonal to the top singular direction), and the
/// result is floored by that column norm, itself a valid lower bound.
inline double operator_norm_estimate(const Matrix& a, int iters = 60) {
  if (a.rows() == 0 || a.cols() == 0) return 0.0;
  double lead_sq = 0.0;
  int lead = 0;
  for (int j = 0; j < a.cols(); ++j) {
    double s = 0.0;
    for (int i = 0; i < a.rows(); ++i) s += std::norm(a(i, j));
    if (s > lead_sq) {
      lead_sq = s;
      lead = j;
    }
  }
  if (lead_sq == 0.0) return 0.0;
  std::vector<cplx> v(a.cols(), cplx(1.0));
  v[lead] += 1.0;
  for (int j = 0; j < a.cols(); ++j)
    v[j] += cplx(0.5 * std::cos(j + 1.0), 0.5 * std::sin(2.0 * j + 1.0));
  double norm = 0.0;
  for (int it = 0; it < iters; ++it) {
    std::vector<cplx> w(a.rows(), 0.0);
    for (int i = 0; i < a.rows(); ++i)
      for (int j = 0; j < a.cols(); ++j) w[i] += a(i, j) * v[j];
    std::vector<cplx> u(a.cols(), 0.0);
    for (int i = 0; i < a.rows(); ++i)
      for (int j = 0; j < a.cols(); ++j) u[j] += std::conj(a(i, j)) * w[i];
    double s = 0.0;
    for (const auto& z : u) s += std::norm(z);
    s = std::sqrt(s);
    if (s == 0.0) break;
    norm = std::sqrt(s);
    for (auto& z : u) z /= s;
    v = std::move(u);
  }
  return std::max(norm, std::sqrt(lead_sq));
}

}  // namespace transferlab
