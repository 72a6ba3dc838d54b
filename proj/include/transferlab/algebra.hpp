#pragma once

#include <algorithm>
#include <string>
#include <vector>

#include "transferlab/eig.hpp"
#include "transferlab/errors.hpp"
#include "transferlab/matrix.hpp"
#include "transferlab/rng.hpp"

namespace transferlab {

/// Numerical tolerances: eq_tol for equality of elements/maps, psd_tol for
/// eigenvalue nonnegativity.  Both must be strictly positive and <= 1e-4.
struct Tolerance {
  double eq_tol = 1e-9;
  double psd_tol = 1e-10;

  Tolerance() = default;
  Tolerance(double eq, double psd) : eq_tol(eq), psd_tol(psd) { validate(); }

  void validate() const {
    if (!(eq_tol > 0.0) || eq_tol > 1e-4 || !(psd_tol > 0.0) || psd_tol > 1e-4)
      throw input_error("Tolerance: values must lie in (0, 1e-4]");
  }
};

/// A finite-dimensional C*-algebra, the direct sum of full matrix blocks
/// M_{d_1} + ... + M_{d_m}.  Coordinates are matrix-unit coefficients, block
/// by block, row-major within a block; total coordinate dimension sum d_k^2.
class BlockAlgebra {
public:
  BlockAlgebra() = default;
  explicit BlockAlgebra(std::vector<int> dims) : dims_(std::move(dims)) {
    if (dims_.empty()) throw input_error("BlockAlgebra: no blocks");
    offsets_.reserve(dims_.size());
    int off = 0;
    for (int d : dims_) {
      if (d <= 0) throw input_error("BlockAlgebra: nonpositive block dimension");
      offsets_.push_back(off);
      off += d * d;
    }
    dim_ = off;
  }

  static BlockAlgebra commutative(int n_points) {
    return BlockAlgebra(std::vector<int>(n_points, 1));
  }
  static BlockAlgebra full_matrix(int d) { return BlockAlgebra({d}); }

  int num_blocks() const { return static_cast<int>(dims_.size()); }
  int block_dim(int k) const { return dims_[k]; }
  int block_offset(int k) const { return offsets_[k]; }
  int dim() const { return dim_; }
  const std::vector<int>& block_dims() const { return dims_; }

  /// Locate coordinate index: (block, row, col).
  void locate(int idx, int& block, int& row, int& col) const {
    block = 0;
    while (block + 1 < num_blocks() && offsets_[block + 1] <= idx) ++block;
    const int local = idx - offsets_[block];
    row = local / dims_[block];
    col = local % dims_[block];
  }

  friend bool operator==(const BlockAlgebra& a, const BlockAlgebra& b) {
    return a.dims_ == b.dims_;
  }

private:
  std::vector<int> dims_;
  std::vector<int> offsets_;
  int dim_ = 0;
};

/// An element of a block algebra: one complex d_k x d_k matrix per block.
class AlgebraElement {
public:
  AlgebraElement() = default;
  AlgebraElement(BlockAlgebra algebra, std::vector<Matrix> blocks)
      : algebra_(std::move(algebra)), blocks_(std::move(blocks)) {
    if (static_cast<int>(blocks_.size()) != algebra_.num_blocks())
      throw input_error("malformed element: block count mismatch");
    for (int k = 0; k < algebra_.num_blocks(); ++k)
      if (blocks_[k].rows() != algebra_.block_dim(k) || blocks_[k].cols() != algebra_.block_dim(k))
        throw input_error("malformed element: block shape mismatch");
  }

  static AlgebraElement zero(const BlockAlgebra& a) {
    std::vector<Matrix> b;
    for (int k = 0; k < a.num_blocks(); ++k) b.emplace_back(a.block_dim(k), a.block_dim(k));
    return AlgebraElement(a, std::move(b));
  }

  static AlgebraElement identity(const BlockAlgebra& a) {
    std::vector<Matrix> b;
    for (int k = 0; k < a.num_blocks(); ++k) b.push_back(Matrix::identity(a.block_dim(k)));
    return AlgebraElement(a, std::move(b));
  }

  /// Matrix unit at coordinate index idx.
  static AlgebraElement basis(const BlockAlgebra& a, int idx) {
    AlgebraElement e = zero(a);
    int k, i, j;
    a.locate(idx, k, i, j);
    e.blocks_[k](i, j) = 1.0;
    return e;
  }

  const BlockAlgebra& algebra() const { return algebra_; }
  const Matrix& block(int k) const { return blocks_[k]; }
  Matrix& block(int k) { return blocks_[k]; }

  AlgebraElement& operator+=(const AlgebraElement& o) {
    check_same(o);
    for (size_t k = 0; k < blocks_.size(); ++k) blocks_[k] += o.blocks_[k];
    return *this;
  }
  AlgebraElement& operator-=(const AlgebraElement& o) {
    check_same(o);
    for (size_t k = 0; k < blocks_.size(); ++k) blocks_[k] -= o.blocks_[k];
    return *this;
  }
  AlgebraElement& operator*=(cplx s) {
    for (auto& b : blocks_) b *= s;
    return *this;
  }

  friend AlgebraElement operator+(AlgebraElement a, const AlgebraElement& b) { return a += b; }
  friend AlgebraElement operator-(AlgebraElement a, const AlgebraElement& b) { return a -= b; }
  friend AlgebraElement operator*(AlgebraElement a, cplx s) { return a *= s; }
  friend AlgebraElement operator*(cplx s, AlgebraElement a) { return a *= s; }

  /// Blockwise product.
  friend AlgebraElement operator*(const AlgebraElement& a, const AlgebraElement& b) {
    a.check_same(b);
    std::vector<Matrix> blocks;
    blocks.reserve(a.blocks_.size());
    for (size_t k = 0; k < a.blocks_.size(); ++k) blocks.push_back(a.blocks_[k] * b.blocks_[k]);
    return AlgebraElement(a.algebra_, std::move(blocks));
  }

  AlgebraElement adjoint() const {
    std::vector<Matrix> blocks;
    blocks.reserve(blocks_.size());
    for (const auto& b : blocks_) blocks.push_back(b.adjoint());
    return AlgebraElement(algebra_, std::move(blocks));
  }

  cplx trace() const {
    cplx t = 0.0;
    for (const auto& b : blocks_) t += b.trace();
    return t;
  }

  double max_abs() const {
    double m = 0.0;
    for (const auto& b : blocks_) m = std::max(m, b.max_abs());
    return m;
  }

  double frobenius_norm() const {
    double s = 0.0;
    for (const auto& b : blocks_) {
      const double f = b.frobenius_norm();
      s += f * f;
    }
    return std::sqrt(s);
  }

  /// C*-norm: largest singular value over blocks.
  double norm() const {
    double m = 0.0;
    for (const auto& b : blocks_) m = std::max(m, std::sqrt(std::max(0.0, max_eigenvalue(b.adjoint() * b))));
    return m;
  }

  Matrix vec() const {
    Matrix v(algebra_.dim(), 1);
    int idx = 0;
    for (const auto& b : blocks_)
      for (int i = 0; i < b.rows(); ++i)
        for (int j = 0; j < b.cols(); ++j) v(idx++, 0) = b(i, j);
    return v;
  }

  static AlgebraElement from_vec(const BlockAlgebra& a, const Matrix& v) {
    if (v.rows() != a.dim() || v.cols() != 1) throw input_error("from_vec: wrong length");
    AlgebraElement e = zero(a);
    int idx = 0;
    for (int k = 0; k < a.num_blocks(); ++k) {
      const int d = a.block_dim(k);
      for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) e.blocks_[k](i, j) = v(idx++, 0);
    }
    return e;
  }

  static AlgebraElement random(const BlockAlgebra& a, Rng& rng) {
    std::vector<Matrix> blocks;
    for (int k = 0; k < a.num_blocks(); ++k)
      blocks.push_back(rng.gaussian_matrix(a.block_dim(k), a.block_dim(k)));
    return AlgebraElement(a, std::move(blocks));
  }

private:
  void check_same(const AlgebraElement& o) const {
    if (!(algebra_ == o.algebra_)) throw input_error("element algebra mismatch");
  }

  BlockAlgebra algebra_;
  std::vector<Matrix> blocks_;
};

inline double distance(const AlgebraElement& a, const AlgebraElement& b) {
  return (a - b).max_abs();
}

/// Two-sided ideal, stored structurally as a subset of blocks (in a
/// finite-dimensional block algebra every closed two-sided ideal is a block
/// sum).
struct IdealBlocks {
  BlockAlgebra algebra;
  std::vector<int> blocks;  // sorted block indices

  IdealBlocks(BlockAlgebra a, std::vector<int> s) : algebra(std::move(a)), blocks(std::move(s)) {
    std::sort(this->blocks.begin(), this->blocks.end());
    for (int k : this->blocks)
      if (k < 0 || k >= algebra.num_blocks()) throw input_error("IdealBlocks: block out of range");
  }

  /// The unit of the ideal: the sum of block identities over the subset.
  AlgebraElement unit() const {
    AlgebraElement q = AlgebraElement::zero(algebra);
    for (int k : blocks) q.block(k) = Matrix::identity(algebra.block_dim(k));
    return q;
  }

  IdealBlocks complement() const {
    std::vector<int> rest;
    for (int k = 0; k < algebra.num_blocks(); ++k)
      if (!std::binary_search(blocks.begin(), blocks.end(), k)) rest.push_back(k);
    return IdealBlocks(algebra, std::move(rest));
  }

  int coordinate_dim() const {
    int s = 0;
    for (int k : blocks) s += algebra.block_dim(k) * algebra.block_dim(k);
    return s;
  }

  std::vector<int> coordinate_indices() const {
    std::vector<int> idx;
    idx.reserve(coordinate_dim());
    for (int k : blocks) {
      const int d = algebra.block_dim(k);
      for (int t = 0; t < d * d; ++t) idx.push_back(algebra.block_offset(k) + t);
    }
    return idx;
  }
};

/// Hermitian within eq_tol and minimal eigenvalue >= -psd_tol, per block.
inline bool is_positive_element(const AlgebraElement& a, const Tolerance& tol = {}) {
  for (int k = 0; k < a.algebra().num_blocks(); ++k) {
    const Matrix& b = a.block(k);
    if (!b.is_hermitian(tol.eq_tol)) return false;
    if (min_eigenvalue(b) < -tol.psd_tol) return false;
  }
  return true;
}

}  // namespace transferlab
