#pragma once

#include <utility>
#include <vector>

#include "transferlab/transfer.hpp"

namespace transferlab {

/// n isometries U_i : C^d -> C^D with mutually orthogonal ranges,
/// U_i* U_j = delta_ij I_d.  Requires D >= n*d.
struct IsometryFamily {
  int n = 0;
  int d = 0;
  int D = 0;
  std::vector<Matrix> U;  // n matrices, each D x d
  int i0 = 0;             // distinguished index

  void validate(const Tolerance& tol = {}) const {
    if (n <= 0 || d <= 0 || D < n * d) throw input_error("isometry family: need n, d >= 1 and D >= n*d");
    if (static_cast<int>(U.size()) != n) throw input_error("isometry family: wrong family size");
    if (i0 < 0 || i0 >= n) throw input_error("isometry family: distinguished index out of range");
    for (const Matrix& u : U)
      if (u.rows() != D || u.cols() != d) throw input_error("isometry family: wrong isometry shape");
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        Matrix g = U[i].adjoint() * U[j];
        if (i == j) g -= Matrix::identity(d);
        if (g.max_abs() > tol.eq_tol)
          throw input_error("isometry family: ranges are not orthonormal");
      }
  }

  BlockAlgebra domain_algebra() const { return BlockAlgebra::full_matrix(d); }
  BlockAlgebra codomain_algebra() const { return BlockAlgebra::full_matrix(D); }
};

/// rho(i,j) parameterizing a transfer operator; must be Hermitian psd.
struct DensityMatrix {
  Matrix rho;

  void validate(int n, const Tolerance& tol = {}) const {
    if (rho.rows() != n || rho.cols() != n) throw input_error("density: wrong shape");
    if (!rho.is_hermitian(tol.eq_tol)) throw input_error("density: not Hermitian");
    if (min_eigenvalue(rho) < -tol.psd_tol) throw input_error("density: not positive semidefinite");
  }

  double trace_real() const { return rho.trace().real(); }
};

struct DiagonalWeights {
  std::vector<double> mu;

  void validate(int n) const {
    if (static_cast<int>(mu.size()) != n) throw input_error("diagonal weights: wrong length");
    for (double m : mu)
      if (!(m >= 0.0)) throw input_error("diagonal weights: negative or non-finite weight");
  }

  DensityMatrix as_density() const {
    Matrix r(static_cast<int>(mu.size()), static_cast<int>(mu.size()));
    for (size_t i = 0; i < mu.size(); ++i) r(static_cast<int>(i), static_cast<int>(i)) = mu[i];
    return DensityMatrix{std::move(r)};
  }
};

struct BasisUnitary {
  Matrix u;

  void validate(int n, const Tolerance& tol = {}) const {
    if (u.rows() != n || u.cols() != n) throw input_error("basis unitary: wrong shape");
    if (distance_max_abs(u.adjoint() * u, Matrix::identity(n)) > tol.eq_tol)
      throw input_error("basis unitary: not unitary");
  }
};

/// Coefficients of a corner element in the tensor identification:
/// a = sum_ij U_i coeff(i,j) U_j*, with coeff(i,j) in M_d.
struct TensorCoefficients {
  int n = 0;
  int d = 0;
  std::vector<Matrix> coeff;  // n*n entries, row-major in (i, j)

  const Matrix& operator()(int i, int j) const { return coeff[i * n + j]; }
  Matrix& operator()(int i, int j) { return coeff[i * n + j]; }
};

/// A positive linear functional on M_n, omega(b) = Tr(density * b).
struct StateFunctional {
  Matrix density;

  cplx operator()(const Matrix& b) const { return (density * b).trace(); }
};

/// The first n*d columns of an orthonormalized random D x D Gaussian matrix,
/// sliced into n isometries.
inline IsometryFamily make_isometry_family(int n, int d, uint64_t seed, int D = 0) {
  if (n < 1 || d < 1) throw input_error("make_isometry_family: need n, d >= 1");
  if (D == 0) D = n * d;
  if (D < n * d) throw input_error("make_isometry_family: D < n*d");
  Rng rng(seed);
  const PivotedQR qr(rng.gaussian_matrix(D, n * d));
  const Matrix q = qr.q_columns(n * d);
  IsometryFamily f;
  f.n = n;
  f.d = d;
  f.D = D;
  for (int i = 0; i < n; ++i) f.U.push_back(q.block(0, i * d, D, d));
  f.validate();
  return f;
}

/// Identity-sliced family: U_i spans coordinates [i*d, (i+1)*d).
inline IsometryFamily canonical_isometry_family(int n, int d, int D = 0) {
  if (n < 1 || d < 1) throw input_error("canonical_isometry_family: need n, d >= 1");
  if (D == 0) D = n * d;
  if (D < n * d) throw input_error("canonical_isometry_family: D < n*d");
  IsometryFamily f;
  f.n = n;
  f.d = d;
  f.D = D;
  for (int i = 0; i < n; ++i) {
    Matrix u(D, d);
    for (int c = 0; c < d; ++c) u(i * d + c, c) = 1.0;
    f.U.push_back(std::move(u));
  }
  f.validate();
  return f;
}

namespace detail {

inline AlgebraElement wrap_full(const BlockAlgebra& alg, Matrix m) {
  std::vector<Matrix> blocks;
  blocks.push_back(std::move(m));
  return AlgebraElement(alg, std::move(blocks));
}

}  // namespace detail

/// alpha(a) = sum_i U_i a U_i*, a verified *-homomorphism M_d -> M_D with
/// alpha(1) the rank-(n*d) range projection.
inline OperatorMap endo_from_isometries(const IsometryFamily& f, const Tolerance& tol = {}) {
  f.validate(tol);
  const BlockAlgebra dom = f.domain_algebra();
  const BlockAlgebra cod = f.codomain_algebra();
  OperatorMap raw = OperatorMap::from_function(dom, cod, [&](const AlgebraElement& a) {
    Matrix s(f.D, f.D);
    for (int i = 0; i < f.n; ++i) s += f.U[i] * a.block(0) * f.U[i].adjoint();
    return detail::wrap_full(cod, std::move(s));
  });
  return verify_star_homomorphism(raw, tol);
}

/// map(a) = sum_ij rho(i,j) U_j* a U_i, the transfer operator with
/// map(1) = Tr(rho) I_d; non-degenerate exactly when Tr(rho) = 1.
inline TransferOperator transfer_from_density(const IsometryFamily& f, const DensityMatrix& r,
                                              const Tolerance& tol = {}) {
  f.validate(tol);
  r.validate(f.n, tol);
  const OperatorMap endo = endo_from_isometries(f, tol);
  OperatorMap raw = OperatorMap::from_function(
      f.codomain_algebra(), f.domain_algebra(), [&](const AlgebraElement& a) {
        Matrix s(f.d, f.d);
        for (int j = 0; j < f.n; ++j) {
          const Matrix left = f.U[j].adjoint() * a.block(0);
          for (int i = 0; i < f.n; ++i) {
            const cplx w = r.rho(i, j);
            if (w == cplx(0.0)) continue;
            s += w * (left * f.U[i]);
          }
        }
        return detail::wrap_full(f.domain_algebra(), std::move(s));
      });
  TransferOperator t = verify_transfer(endo, raw, tol);

  Matrix lam1 = t.map.apply(AlgebraElement::identity(endo.codomain())).block(0);
  lam1 -= Matrix::identity(f.d) * cplx(r.trace_real(), 0.0);
  if (lam1.max_abs() > 1e-12 * std::max(1.0, static_cast<double>(f.n)) * std::max(1.0, r.trace_real()))
    throw structural_error("image of the unit is not Tr(rho) times the identity");
  t.nondegenerate = std::abs(r.trace_real() - 1.0) <= tol.eq_tol;
  return t;
}

/// Splits a corner element into tensor coefficients coeff(i,j) = U_i* a U_j.
inline TensorCoefficients tensor_split(const IsometryFamily& f, const Matrix& a,
                                       const Tolerance& tol = {}) {
  f.validate(tol);
  if (a.rows() != f.D || a.cols() != f.D) throw input_error("tensor_split: wrong element shape");
  Matrix p(f.D, f.D);
  for (int i = 0; i < f.n; ++i) p += f.U[i] * f.U[i].adjoint();
  if (distance_max_abs(p * a * p, a) > tol.eq_tol * std::max(1.0, a.max_abs()))
    throw input_error("tensor_split: element is not in the corner");

  TensorCoefficients c;
  c.n = f.n;
  c.d = f.d;
  c.coeff.resize(static_cast<size_t>(f.n) * f.n);
  for (int i = 0; i < f.n; ++i) {
    const Matrix left = f.U[i].adjoint() * a;
    for (int j = 0; j < f.n; ++j) c(i, j) = left * f.U[j];
  }
  return c;
}

/// Reassembles sum_ij U_i coeff(i,j) U_j*.
inline Matrix tensor_join(const IsometryFamily& f, const TensorCoefficients& c) {
  if (c.n != f.n || c.d != f.d) throw input_error("tensor_join: coefficient shape mismatch");
  Matrix a(f.D, f.D);
  for (int i = 0; i < f.n; ++i)
    for (int j = 0; j < f.n; ++j) a += f.U[i] * c(i, j) * f.U[j].adjoint();
  return a;
}

/// The simple tensor a0 (x) b = sum_ij b(i,j) U_i a0 U_j*.
inline Matrix tensor_join(const IsometryFamily& f, const Matrix& a0, const Matrix& b) {
  if (a0.rows() != f.d || a0.cols() != f.d || b.rows() != f.n || b.cols() != f.n)
    throw input_error("tensor_join: factor shape mismatch");
  Matrix a(f.D, f.D);
  for (int i = 0; i < f.n; ++i) {
    const Matrix ua = f.U[i] * a0;
    for (int j = 0; j < f.n; ++j) {
      const cplx w = b(i, j);
      if (w == cplx(0.0)) continue;
      a += w * (ua * f.U[j].adjoint());
    }
  }
  return a;
}

/// Reads off the functional omega with map(1 (x) b) = omega(b) I_d.  Throws
/// structural_error if some image fails to be a scalar multiple of the
/// identity.
inline StateFunctional state_from_transfer(const IsometryFamily& f, const TransferOperator& t,
                                           const Tolerance& tol = {}) {
  f.validate(tol);
  if (!t.map.flags().transfer)
    throw input_error("state_from_transfer: transfer operator is not verified");
  if (!(t.map.domain() == f.codomain_algebra()) || !(t.map.codomain() == f.domain_algebra()))
    throw input_error("state_from_transfer: operator does not match the family");

  Matrix w(f.n, f.n);
  const BlockAlgebra cod = f.codomain_algebra();
  for (int i = 0; i < f.n; ++i)
    for (int j = 0; j < f.n; ++j) {
      const Matrix x = f.U[i] * f.U[j].adjoint();
      const Matrix v = t.map.apply(detail::wrap_full(cod, x)).block(0);
      const cplx s = v.trace() / cplx(static_cast<double>(f.d), 0.0);
      if (distance_max_abs(v, Matrix::identity(f.d) * s) > tol.eq_tol * std::max(1.0, std::abs(s)))
        throw structural_error("image of a unit tensor is not scalar");
      w(i, j) = s;
    }
  StateFunctional omega{w.transpose()};
  if (!omega.density.is_hermitian(std::sqrt(tol.eq_tol)) ||
      min_eigenvalue(omega.density) < -tol.psd_tol)
    throw structural_error("recovered functional is not positive");
  return omega;
}

/// The conditional expectation onto alpha(M_d) determined by a state rho via
/// the tensor identification: E(a0 (x) b) = a0 (x) omega(b) 1.  Verified, and
/// checked against the composition endo o map.
inline ConditionalExpectation expectation_from_state(const IsometryFamily& f,
                                                     const DensityMatrix& r,
                                                     const Tolerance& tol = {}) {
  f.validate(tol);
  r.validate(f.n, tol);
  if (std::abs(r.trace_real() - 1.0) > tol.eq_tol)
    throw input_error("expectation_from_state: density must have unit trace");

  const OperatorMap endo = endo_from_isometries(f, tol);
  const BlockAlgebra cod = f.codomain_algebra();
  const BlockAlgebra dom = f.domain_algebra();

  // E(x) = alpha( sum_ij rho(j,i) U_i* x U_j ): the coefficient sum is the
  // functional applied on the M_n leg, re-embedded along the M_d leg.
  OperatorMap raw = OperatorMap::from_function(cod, cod, [&](const AlgebraElement& a) {
    Matrix s(f.d, f.d);
    for (int i = 0; i < f.n; ++i) {
      const Matrix left = f.U[i].adjoint() * a.block(0);
      for (int j = 0; j < f.n; ++j) {
        const cplx w = r.rho(j, i);
        if (w == cplx(0.0)) continue;
        s += w * (left * f.U[j]);
      }
    }
    return endo.apply(detail::wrap_full(dom, std::move(s)));
  });

  ConditionalExpectation e = verify_expectation(raw, orthonormal_range(endo.matrix()), tol);
  const TransferOperator t = transfer_from_density(f, r, tol);
  if (map_distance(e.map, compose(endo, t.map)) > tol.eq_tol)
    throw structural_error("tensor-identification expectation differs from endo o map");
  return e;
}

/// map(a) = sum_i mu_i U_i* a U_i.  Built directly from the weighted sum, so
/// it independently cross-checks transfer_from_density on diag(mu).
inline TransferOperator diagonal_transfer(const IsometryFamily& f, const DiagonalWeights& w,
                                          const Tolerance& tol = {}) {
  f.validate(tol);
  w.validate(f.n);
  const OperatorMap endo = endo_from_isometries(f, tol);
  OperatorMap raw = OperatorMap::from_function(
      f.codomain_algebra(), f.domain_algebra(), [&](const AlgebraElement& a) {
        Matrix s(f.d, f.d);
        for (int i = 0; i < f.n; ++i) {
          if (w.mu[i] == 0.0) continue;
          s += cplx(w.mu[i], 0.0) * (f.U[i].adjoint() * a.block(0) * f.U[i]);
        }
        return detail::wrap_full(f.domain_algebra(), std::move(s));
      });
  TransferOperator t = verify_transfer(endo, raw, tol);
  double total = 0.0;
  for (double m : w.mu) total += m;
  t.nondegenerate = std::abs(total - 1.0) <= tol.eq_tol;
  return t;
}

/// The diagonal transfer operator of the rotated family V_i = sum_j u(j,i) U_j,
/// which has the same endomorphism; equals transfer_from_density on
/// rho = u diag(mu) u*.
inline TransferOperator rotate_basis(const IsometryFamily& f, const BasisUnitary& u,
                                     const DiagonalWeights& w, const Tolerance& tol = {}) {
  f.validate(tol);
  u.validate(f.n, tol);
  w.validate(f.n);
  IsometryFamily rotated = f;
  for (int i = 0; i < f.n; ++i) {
    Matrix v(f.D, f.d);
    for (int j = 0; j < f.n; ++j) v += u.u(j, i) * f.U[j];
    rotated.U[i] = std::move(v);
  }
  rotated.validate(tol);
  const OperatorMap endo = endo_from_isometries(f, tol);
  OperatorMap raw = OperatorMap::from_function(
      f.codomain_algebra(), f.domain_algebra(), [&](const AlgebraElement& a) {
        Matrix s(f.d, f.d);
        for (int i = 0; i < f.n; ++i) {
          if (w.mu[i] == 0.0) continue;
          s += cplx(w.mu[i], 0.0) * (rotated.U[i].adjoint() * a.block(0) * rotated.U[i]);
        }
        return detail::wrap_full(f.domain_algebra(), std::move(s));
      });
  TransferOperator t = verify_transfer(endo, raw, tol);
  double total = 0.0;
  for (double m : w.mu) total += m;
  t.nondegenerate = std::abs(total - 1.0) <= tol.eq_tol;
  return t;
}

}  // namespace transferlab
