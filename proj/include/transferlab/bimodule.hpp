#pragma once

#include <array>
#include <optional>
#include <utility>
#include <vector>

#include "transferlab/transfer.hpp"

namespace transferlab {

/// The right-module structure on M = endo(1) A: left action a.x = endo(a) x,
/// right action x.a = x a, right inner <x,y> = x* y.  The basis is the
/// rank-revealing reduction of {endo(1) e_i} to a linearly independent set.
class Correspondence {
public:
  Correspondence(OperatorMap endo, AlgebraElement unit, Matrix basis, std::vector<int> pivots)
      : endo_(std::move(endo)),
        unit_(std::move(unit)),
        basis_(std::move(basis)),
        pivots_(std::move(pivots)),
        basis_qr_(basis_) {}

  const OperatorMap& endo() const { return endo_; }
  const BlockAlgebra& value_algebra() const { return endo_.domain(); }
  const BlockAlgebra& space_algebra() const { return endo_.codomain(); }
  const AlgebraElement& unit() const { return unit_; }
  int dim() const { return basis_.cols(); }
  const std::vector<int>& pivots() const { return pivots_; }

  AlgebraElement basis_element(int r) const {
    return AlgebraElement::from_vec(space_algebra(), basis_.col(r));
  }

  /// Coordinates of x in the stored basis; throws if x is outside M.
  Matrix coordinates(const AlgebraElement& x, double residual_tol = 1e-8) const {
    const Matrix rhs = x.vec();
    const Matrix c = basis_qr_.solve(rhs, basis_.cols());
    const double res = (basis_ * c - rhs).frobenius_norm();
    if (res > residual_tol * std::max(1.0, rhs.frobenius_norm()))
      throw input_error("element is outside the correspondence space");
    return c;
  }

  AlgebraElement left_action(const AlgebraElement& a, const AlgebraElement& x) const {
    return endo_.apply(a) * x;
  }
  AlgebraElement right_action(const AlgebraElement& x, const AlgebraElement& a) const {
    return x * a;
  }
  AlgebraElement right_inner(const AlgebraElement& x, const AlgebraElement& y) const {
    return x.adjoint() * y;
  }

private:
  OperatorMap endo_;
  AlgebraElement unit_;
  Matrix basis_;
  std::vector<int> pivots_;
  PivotedQR basis_qr_;
};

/// The left A-valued form on a Correspondence, stored by its values on basis
/// pairs: gram(r, s) = form(x_r, x_s).  Linear in the first slot, conjugate
/// linear in the second.
struct LeftInner {
  int dim = 0;
  std::vector<AlgebraElement> gram;  // dim*dim entries, row-major

  const AlgebraElement& operator()(int r, int s) const { return gram[r * dim + s]; }
};

inline Correspondence build_correspondence(const OperatorMap& endo, const Tolerance& tol = {}) {
  if (!endo.flags().endomorphism)
    throw input_error("build_correspondence: map must be a verified *-homomorphism");
  const BlockAlgebra& cod = endo.codomain();
  const AlgebraElement p = corner_projection(endo);

  Matrix cols(cod.dim(), cod.dim());
  for (int i = 0; i < cod.dim(); ++i)
    cols.set_col(i, (p * AlgebraElement::basis(cod, i)).vec());
  PivotedQR qr(cols);
  const int rank = qr.rank_rel(1e-10);
  Matrix basis(cod.dim(), rank);
  std::vector<int> pivots(rank);
  for (int r = 0; r < rank; ++r) {
    pivots[r] = qr.pivot(r);
    basis.set_col(r, cols.col(pivots[r]));
  }

  Correspondence c(endo, p, std::move(basis), std::move(pivots));
  for (int r = 0; r < c.dim(); ++r) {
    const AlgebraElement x = c.basis_element(r);
    if (distance(p * x, x) > tol.eq_tol)
      throw structural_error("correspondence basis escapes endo(1) A");
    if (!is_positive_element(c.right_inner(x, x), tol))
      throw structural_error("right inner product fails positivity on the basis");
  }
  return c;
}

/// Assembles form(x, y) = map(x y*) from any verified transfer operator,
/// without checking the left-inner axioms.  Used to probe systems where the
/// axioms are expected to fail.
inline LeftInner left_inner_candidate(const Correspondence& c, const TransferOperator& t) {
  if (!t.map.flags().transfer)
    throw input_error("left_inner_candidate: transfer operator is not verified");
  if (map_distance(t.endo, c.endo()) > 1e-12)
    throw input_error("left_inner_candidate: transfer operator belongs to a different system");
  LeftInner l;
  l.dim = c.dim();
  l.gram.reserve(static_cast<size_t>(l.dim) * l.dim);
  for (int r = 0; r < l.dim; ++r) {
    const AlgebraElement xr = c.basis_element(r);
    for (int s = 0; s < l.dim; ++s)
      l.gram.push_back(t.map.apply(xr * c.basis_element(s).adjoint()));
  }
  return l;
}

/// Evaluates the form on arbitrary elements of M via basis coordinates.
inline AlgebraElement eval_left_inner(const Correspondence& c, const LeftInner& l,
                                      const AlgebraElement& x, const AlgebraElement& y) {
  const Matrix cx = c.coordinates(x);
  const Matrix cy = c.coordinates(y);
  AlgebraElement out = AlgebraElement::zero(c.value_algebra());
  for (int r = 0; r < l.dim; ++r) {
    if (cx(r, 0) == cplx(0.0)) continue;
    for (int s = 0; s < l.dim; ++s) {
      const cplx w = cx(r, 0) * std::conj(cy(s, 0));
      if (w == cplx(0.0)) continue;
      out += w * l(r, s);
    }
  }
  return out;
}

/// The left inner product derived from the complete transfer operator:
/// form(x, y) = map(x y*).  Verifies positivity, faithfulness, and the
/// left-module identity; requires the complete flag.
inline LeftInner left_inner_from_transfer(const Correspondence& c, const TransferOperator& t,
                                          const Tolerance& tol = {}) {
  if (!(t.complete && *t.complete))
    throw input_error("left_inner_from_transfer: transfer operator lacks the complete flag");
  LeftInner l = left_inner_candidate(c, t);

  for (int r = 0; r < l.dim; ++r)
    if (!is_positive_element(l(r, r), tol))
      throw structural_error("left inner product fails positivity on the basis");

  // Faithfulness through the scalar form S(r,s) = tr form(x_r, x_s): the form
  // vanishes on some nonzero x exactly when S is singular.  Trivial when the
  // correspondence is zero-dimensional.
  Matrix s(l.dim, l.dim);
  for (int r = 0; r < l.dim; ++r)
    for (int q = 0; q < l.dim; ++q) s(r, q) = l(r, q).trace();
  if (l.dim > 0 && min_eigenvalue(s) < tol.psd_tol)
    throw structural_error("left inner product is not faithful");

  const BlockAlgebra& dom = c.value_algebra();
  for (int a_idx = 0; a_idx < dom.dim(); ++a_idx) {
    const AlgebraElement a = AlgebraElement::basis(dom, a_idx);
    for (int r = 0; r < l.dim; ++r) {
      const AlgebraElement ax = c.left_action(a, c.basis_element(r));
      for (int q = 0; q < l.dim; ++q) {
        const AlgebraElement lhs = t.map.apply(ax * c.basis_element(q).adjoint());
        if (distance(lhs, a * l(r, q)) > tol.eq_tol)
          throw structural_error("left inner product fails the left-module identity");
      }
    }
  }
  return l;
}

struct ImprimitivityReport {
  bool holds = false;
  double max_residual = 0.0;
  std::optional<std::array<int, 3>> witness;  // basis triple (x, y, z) of first failure
  double witness_residual = 0.0;

  explicit operator bool() const { return holds; }
};

/// Checks x . <y,z>_A = form(x,y) . z on all basis triples.
inline ImprimitivityReport check_imprimitivity(const Correspondence& c, const LeftInner& l,
                                               const Tolerance& tol = {}) {
  if (l.dim != c.dim()) throw input_error("check_imprimitivity: basis size mismatch");
  ImprimitivityReport report;
  report.holds = true;
  std::vector<AlgebraElement> basis;
  basis.reserve(c.dim());
  for (int r = 0; r < c.dim(); ++r) basis.push_back(c.basis_element(r));

  for (int x = 0; x < c.dim(); ++x)
    for (int y = 0; y < c.dim(); ++y)
      for (int z = 0; z < c.dim(); ++z) {
        const AlgebraElement lhs = basis[x] * c.right_inner(basis[y], basis[z]);
        const AlgebraElement rhs = c.left_action(l(x, y), basis[z]);
        const double res = distance(lhs, rhs);
        report.max_residual = std::max(report.max_residual, res);
        if (res > tol.eq_tol && report.holds) {
          report.holds = false;
          report.witness = {x, y, z};
          report.witness_residual = res;
        }
      }
  return report;
}

/// Recovers the transfer operator map(a) = form(endo(1) a, endo(1)) and
/// verifies it is the complete one.
inline TransferOperator transfer_from_left_inner(const Correspondence& c, const LeftInner& l,
                                                 const Tolerance& tol = {}) {
  const ImprimitivityReport imp = check_imprimitivity(c, l, tol);
  if (!imp.holds)
    throw verification_error("transfer_from_left_inner: the form fails imprimitivity");

  const BlockAlgebra& cod = c.space_algebra();
  const AlgebraElement p = c.unit();
  OperatorMap raw = OperatorMap::from_function(cod, c.value_algebra(), [&](const AlgebraElement& a) {
    return eval_left_inner(c, l, p * a, p);
  });
  TransferOperator t = verify_transfer(c.endo(), raw, tol);

  const TransferOperator reference = complete_transfer(c.endo(), tol);
  if (map_distance(t.map, reference.map) > tol.eq_tol)
    throw verification_error("recovered transfer operator is not the complete one");
  t.nondegenerate = true;
  t.complete = true;
  return t;
}

}  // namespace transferlab
