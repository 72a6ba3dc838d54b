#pragma once

// Reference systems and random generators shared across the test suite.
//
// sys_a: three points, gamma = (0 -> 0, 1 -> 0, 2 -> 2), a two-point fiber.
// sys_b: two points, delta = {0}, gamma(0) = 1; injective, so complete.
// sys_c: two isometries on C^1 -> C^2 (the canonical slicing).
// sys_d: M2 + C with alpha(a + l) = l E11 + l; the range is a diagonal
//        inside its corner, so no complete transfer operator exists, and
//        Lambda_t(a + l) = 0 + (t a11 + (1-t) l) is a one-parameter family of
//        non-degenerate transfer operators.

#include <algorithm>
#include <numeric>
#include <vector>

#include <transferlab/transferlab.hpp>

namespace testsys {

using namespace transferlab;

inline FiniteDynSystem sys_a() { return {3, {0, 1, 2}, {0, 0, 2}}; }
inline FiberWeights sys_a_weights() { return {{0.3, 0.7, 1.0}}; }

inline FiniteDynSystem sys_b() { return {2, {0}, {1}}; }

inline IsometryFamily sys_c() { return canonical_isometry_family(2, 1); }

inline BlockAlgebra sys_d_algebra() { return BlockAlgebra({2, 1}); }

inline Matrix sys_d_endo_matrix() {
  Matrix m(5, 5);
  m(0, 4) = 1.0;
  m(4, 4) = 1.0;
  return m;
}

inline OperatorMap sys_d_endo(const Tolerance& tol = {}) {
  const BlockAlgebra alg = sys_d_algebra();
  return verify_star_homomorphism(OperatorMap(alg, alg, sys_d_endo_matrix()), tol);
}

inline Matrix sys_d_lambda_matrix(double t) {
  Matrix m(5, 5);
  m(4, 0) = t;
  m(4, 4) = 1.0 - t;
  return m;
}

inline OperatorMap sys_d_lambda(double t) {
  const BlockAlgebra alg = sys_d_algebra();
  return OperatorMap(alg, alg, sys_d_lambda_matrix(t));
}

inline FiniteDynSystem random_system(Rng& rng, int max_points) {
  FiniteDynSystem s;
  s.n_points = 1 + static_cast<int>(rng.raw() % static_cast<uint64_t>(max_points));
  for (int x = 0; x < s.n_points; ++x) {
    if (rng.uniform() < 0.25) continue;
    s.delta.push_back(x);
    s.gamma.push_back(static_cast<int>(rng.raw() % static_cast<uint64_t>(s.n_points)));
  }
  return s;
}

inline FiniteDynSystem random_injective_system(Rng& rng, int max_points) {
  FiniteDynSystem s;
  s.n_points = 1 + static_cast<int>(rng.raw() % static_cast<uint64_t>(max_points));
  std::vector<int> targets(s.n_points);
  std::iota(targets.begin(), targets.end(), 0);
  for (int x = s.n_points - 1; x > 0; --x)
    std::swap(targets[x], targets[rng.raw() % static_cast<uint64_t>(x + 1)]);
  int used = 0;
  for (int x = 0; x < s.n_points; ++x) {
    if (rng.uniform() < 0.3) continue;
    s.delta.push_back(x);
    s.gamma.push_back(targets[used++]);
  }
  return s;
}

inline Matrix haar_unitary(Rng& rng, int n) {
  return PivotedQR(rng.gaussian_matrix(n, n)).q_columns(n);
}

/// Wrap a matrix as the sole block of a single-block algebra element.
inline AlgebraElement wrap(const BlockAlgebra& alg, Matrix m) {
  AlgebraElement e = AlgebraElement::zero(alg);
  e.block(0) = std::move(m);
  return e;
}

/// A random *-endomorphism of the block algebra with the given dims.  Each
/// target block is either dead or receives one source block embedded in its
/// top-left corner, conjugated by a random block unitary.  With
/// `hereditary` the target-to-source assignment is injective (so the range
/// fills its corner); otherwise one source feeds two targets, pinning the
/// range to a proper diagonal of the corner.
inline OperatorMap random_matrix_endo(Rng& rng, const std::vector<int>& dims, bool hereditary,
                                      const Tolerance& tol = {}) {
  const BlockAlgebra alg(dims);
  const int m = alg.num_blocks();
  std::vector<int> source(m, -1);
  if (hereditary) {
    std::vector<char> taken(m, 0);
    for (int j = 0; j < m; ++j) {
      if (rng.uniform() < 0.25) continue;
      for (int trial = 0; trial < 2 * m; ++trial) {
        const int i = static_cast<int>(rng.raw() % static_cast<uint64_t>(m));
        if (!taken[i] && dims[i] <= dims[j]) {
          source[j] = i;
          taken[i] = 1;
          break;
        }
      }
    }
    if (std::all_of(source.begin(), source.end(), [](int s) { return s < 0; })) source[0] = 0;
  } else {
    int s = 0;
    for (int i = 1; i < m; ++i)
      if (dims[i] < dims[s]) s = i;
    int j1 = -1, j2 = -1;
    for (int j = 0; j < m; ++j)
      if (dims[j] >= dims[s]) (j1 < 0 ? j1 : j2) = j;
    source[j1] = s;
    source[j2] = s;
  }

  std::vector<Matrix> u;
  u.reserve(m);
  for (int j = 0; j < m; ++j) u.push_back(haar_unitary(rng, dims[j]));

  OperatorMap raw = OperatorMap::from_function(alg, alg, [&](const AlgebraElement& a) {
    AlgebraElement out = AlgebraElement::zero(alg);
    for (int j = 0; j < m; ++j) {
      if (source[j] < 0) continue;
      Matrix e(dims[j], dims[j]);
      e.set_block(0, 0, a.block(source[j]));
      out.block(j) = u[j] * e * u[j].adjoint();
    }
    return out;
  });
  return verify_star_homomorphism(raw, tol);
}

/// Random psd density, optionally normalized to unit trace.
inline DensityMatrix random_density(Rng& rng, int n, bool unit_trace) {
  const Matrix g = rng.gaussian_matrix(n, n);
  Matrix rho = g * g.adjoint();
  if (unit_trace) rho *= cplx(1.0 / rho.trace().real(), 0.0);
  return DensityMatrix{std::move(rho)};
}

}  // namespace testsys
