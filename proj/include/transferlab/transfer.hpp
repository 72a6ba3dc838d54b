#pragma once

#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "transferlab/operator_map.hpp"

namespace transferlab {

/// A verified transfer operator for the endomorphism it is paired with:
/// positive, linear, and satisfying map(endo(a) b) = a map(b).
struct TransferOperator {
  OperatorMap map;   // flags().transfer set by verify_transfer
  OperatorMap endo;  // the verified *-homomorphism it transfers
  PositivityVerdict positivity;
  double max_residual = 0.0;
  std::optional<bool> nondegenerate;
  std::optional<bool> complete;
};

/// A conditional expectation represented as an ambient map P on the codomain
/// algebra with P = P o compression, so the corner restriction determines it.
struct ConditionalExpectation {
  OperatorMap map;          // flags().expectation set by verification
  Matrix range_basis;       // orthonormal coordinate basis of the range
  AlgebraElement corner_unit;  // the unit of the range algebra
  PositivityVerdict positivity;
  double max_residual = 0.0;
};

inline AlgebraElement corner_projection(const OperatorMap& endo) {
  return endo.apply(AlgebraElement::identity(endo.domain()));
}

namespace detail {

inline void require_endo(const OperatorMap& endo, const char* who) {
  if (!endo.flags().endomorphism)
    throw input_error(std::string(who) + ": first argument must be a verified *-homomorphism");
}

inline std::string residual_message(const char* what, int i, int j, double r) {
  std::ostringstream os;
  os << what << " violated at basis pair (" << i << ", " << j << "), residual " << r;
  return os.str();
}

}  // namespace detail

/// Checks that cand is a transfer operator for endo: positivity, the transfer
/// identity cand(endo(a) b) = a cand(b) on all basis pairs, its adjoint form
/// cand(b endo(a)) = cand(b) a, and centrality plus positivity of cand(1).
/// Throws verification_error with a witness description on failure.
inline TransferOperator verify_transfer(const OperatorMap& endo, const OperatorMap& cand,
                                        const Tolerance& tol = {}, int positivity_trials = 8,
                                        uint64_t seed = 0x7472616e735eedULL) {
  detail::require_endo(endo, "verify_transfer");
  if (!(cand.domain() == endo.codomain()) || !(cand.codomain() == endo.domain()))
    throw input_error("verify_transfer: candidate must map the codomain back to the domain");

  const PositivityVerdict verdict = is_positive_map(cand, tol, positivity_trials, seed);
  if (!verdict.positive())
    throw verification_error("candidate transfer map is not positive");

  const BlockAlgebra& a_dom = endo.domain();
  const BlockAlgebra& a_cod = endo.codomain();
  double max_res = 0.0;

  std::vector<AlgebraElement> alpha_img, cand_img;
  alpha_img.reserve(a_dom.dim());
  cand_img.reserve(a_cod.dim());
  for (int i = 0; i < a_dom.dim(); ++i)
    alpha_img.push_back(endo.apply(AlgebraElement::basis(a_dom, i)));
  for (int j = 0; j < a_cod.dim(); ++j)
    cand_img.push_back(cand.apply(AlgebraElement::basis(a_cod, j)));

  for (int i = 0; i < a_dom.dim(); ++i) {
    const AlgebraElement ei = AlgebraElement::basis(a_dom, i);
    for (int j = 0; j < a_cod.dim(); ++j) {
      const AlgebraElement ej = AlgebraElement::basis(a_cod, j);
      const double r1 = distance(cand.apply(alpha_img[i] * ej), ei * cand_img[j]);
      max_res = std::max(max_res, r1);
      if (r1 > tol.eq_tol)
        throw verification_error(detail::residual_message("transfer identity", i, j, r1));
      const double r2 = distance(cand.apply(ej * alpha_img[i]), cand_img[j] * ei);
      max_res = std::max(max_res, r2);
      if (r2 > tol.eq_tol)
        throw verification_error(detail::residual_message("adjoint transfer identity", i, j, r2));
    }
  }

  const AlgebraElement lam1 = cand.apply(AlgebraElement::identity(a_cod));
  if (!is_positive_element(lam1, tol))
    throw verification_error("image of the unit under the candidate is not positive");
  for (int i = 0; i < a_dom.dim(); ++i) {
    const AlgebraElement ei = AlgebraElement::basis(a_dom, i);
    const double r = distance(lam1 * ei, ei * lam1);
    max_res = std::max(max_res, r);
    if (r > tol.eq_tol)
      throw verification_error("image of the unit under the candidate is not central");
  }

  RoleFlags f = cand.flags();
  f.transfer = true;
  f.positive = verdict.positive();
  TransferOperator t;
  t.map = cand.with_flags(f);
  t.endo = endo;
  t.positivity = verdict;
  t.max_residual = max_res;
  return t;
}

/// The norm of a positive map, attained at the unit: |map(1)|.
inline double transfer_norm(const TransferOperator& t) {
  return t.map.apply(AlgebraElement::identity(t.map.domain())).norm();
}

/// Non-degeneracy: endo(map(1)) = endo(1).  Cross-checked against the
/// equivalent condition endo o map o endo = endo on every basis element;
/// disagreement is a structural failure.
inline bool is_nondegenerate(const TransferOperator& t, const Tolerance& tol = {}) {
  const OperatorMap& alpha = t.endo;
  const OperatorMap& lam = t.map;
  const BlockAlgebra& a_dom = alpha.domain();

  const AlgebraElement lhs = alpha.apply(lam.apply(AlgebraElement::identity(alpha.codomain())));
  const AlgebraElement rhs = corner_projection(alpha);
  const bool unit_cond = distance(lhs, rhs) <= tol.eq_tol;

  const OperatorMap aoloa = compose(alpha, compose(lam, alpha));
  const bool retract_cond = map_distance(aoloa, alpha) <= tol.eq_tol;

  if (unit_cond != retract_cond)
    throw structural_error(
        "non-degeneracy conditions disagree: endo(map(1)) = endo(1) is " +
        std::string(unit_cond ? "true" : "false") +
        " but endo o map o endo = endo is " + std::string(retract_cond ? "true" : "false"));
  return unit_cond;
}

/// The unit of ker(endo): the sum of block identities over the kernel blocks.
/// It is a central projection with endo(q) = 0, and for any non-degenerate
/// transfer operator it equals 1 - map(1).
inline AlgebraElement kernel_unit(const OperatorMap& endo, const Tolerance& tol = {}) {
  detail::require_endo(endo, "kernel_unit");
  const AlgebraElement q = kernel_blocks(endo, tol).unit();
  if (endo.apply(q).max_abs() > tol.eq_tol)
    throw structural_error("kernel unit is not annihilated by the endomorphism");
  return q;
}

/// The ideal complementary to ker(endo): the block sum over blocks on which
/// endo is injective.
inline IdealBlocks annihilator_projection(const OperatorMap& endo, const Tolerance& tol = {}) {
  detail::require_endo(endo, "annihilator_projection");
  return kernel_blocks(endo, tol).complement();
}

/// Whether the range of endo is hereditary, i.e. equals the corner
/// endo(1) A endo(1).  The containment range <= corner always holds for a
/// *-homomorphism; its failure indicates corrupted input.
inline bool is_hereditary_range(const OperatorMap& endo, const Tolerance& tol = {}) {
  detail::require_endo(endo, "is_hereditary_range");
  const BlockAlgebra& a_cod = endo.codomain();
  const AlgebraElement p = corner_projection(endo);

  const Matrix range_basis = orthonormal_range(endo.matrix());

  Matrix corner_cols(a_cod.dim(), a_cod.dim());
  for (int j = 0; j < a_cod.dim(); ++j)
    corner_cols.set_col(j, (p * AlgebraElement::basis(a_cod, j) * p).vec());
  const Matrix corner_basis = orthonormal_range(corner_cols);

  for (int c = 0; c < endo.matrix().cols(); ++c) {
    const Matrix v = endo.matrix().col(c);
    const double scale = std::max(1.0, v.frobenius_norm());
    if (distance_to_span(corner_basis, v) > std::sqrt(tol.eq_tol) * scale)
      throw structural_error("range of *-homomorphism escapes its corner");
  }
  return range_basis.cols() == corner_basis.cols();
}

namespace detail {

/// Solve endo(x) = target for x supported on the complement of ker(endo).
/// Returns x; throws structural_error if the least-squares residual exceeds
/// 1e-8 * max(1, |target|).
inline AlgebraElement preimage_on_complement(const OperatorMap& endo,
                                             const PivotedQR& qr_restricted,
                                             const std::vector<int>& support_idx,
                                             const AlgebraElement& target) {
  const Matrix rhs = target.vec();
  const int rank = qr_restricted.rank_rel(1e-10);
  const Matrix y = qr_restricted.solve(rhs, rank);
  Matrix full(endo.domain().dim(), 1);
  for (size_t t = 0; t < support_idx.size(); ++t) full(support_idx[t], 0) = y(t, 0);
  const AlgebraElement x = AlgebraElement::from_vec(endo.domain(), full);
  const double res = distance(endo.apply(x), target);
  if (res > 1e-8 * std::max(1.0, rhs.frobenius_norm()))
    throw structural_error("preimage solve under the endomorphism left residual " +
                           std::to_string(res));
  return x;
}

}  // namespace detail

/// The complete transfer operator for endo: map(a) is the unique preimage of
/// endo(1) a endo(1) supported on the complement of ker(endo).  Exists iff
/// the range of endo is hereditary; throws verification_error otherwise.
inline TransferOperator complete_transfer(const OperatorMap& endo, const Tolerance& tol = {}) {
  detail::require_endo(endo, "complete_transfer");
  if (!is_hereditary_range(endo, tol))
    throw verification_error(
        "no complete transfer operator: the range of the endomorphism is not hereditary");

  const BlockAlgebra& a_dom = endo.domain();
  const BlockAlgebra& a_cod = endo.codomain();
  const AlgebraElement p = corner_projection(endo);
  const IdealBlocks support = annihilator_projection(endo, tol);
  const std::vector<int> idx = support.coordinate_indices();

  Matrix restricted(a_cod.dim(), static_cast<int>(idx.size()));
  for (size_t t = 0; t < idx.size(); ++t) restricted.set_col(static_cast<int>(t), endo.matrix().col(idx[t]));
  const PivotedQR qr(restricted);

  Matrix lam_matrix(a_dom.dim(), a_cod.dim());
  for (int j = 0; j < a_cod.dim(); ++j) {
    const AlgebraElement target = p * AlgebraElement::basis(a_cod, j) * p;
    const AlgebraElement x = detail::preimage_on_complement(endo, qr, idx, target);
    lam_matrix.set_col(j, x.vec());
  }

  TransferOperator t = verify_transfer(endo, OperatorMap(a_cod, a_dom, std::move(lam_matrix)), tol);
  if (!is_nondegenerate(t, tol))
    throw structural_error("complete transfer operator failed the non-degeneracy check");
  t.nondegenerate = true;
  t.complete = true;
  return t;
}

namespace detail {

/// The unit of the subalgebra spanned by orthonormal coordinate columns:
/// the element u in the span with u b = b u = b for every spanning element.
inline AlgebraElement span_unit(const BlockAlgebra& alg, const Matrix& basis,
                                const Tolerance& tol) {
  const int r = basis.cols();
  if (r == 0) return AlgebraElement::zero(alg);
  std::vector<AlgebraElement> b;
  b.reserve(r);
  for (int c = 0; c < r; ++c) b.push_back(AlgebraElement::from_vec(alg, basis.col(c)));

  Matrix lhs(2 * r * alg.dim(), r);
  Matrix rhs(2 * r * alg.dim(), 1);
  for (int i = 0; i < r; ++i) {
    for (int c = 0; c < r; ++c) {
      const Matrix left = (b[c] * b[i]).vec();
      const Matrix right = (b[i] * b[c]).vec();
      for (int t = 0; t < alg.dim(); ++t) {
        lhs((2 * i) * alg.dim() + t, c) = left(t, 0);
        lhs((2 * i + 1) * alg.dim() + t, c) = right(t, 0);
      }
    }
    const Matrix target = b[i].vec();
    for (int t = 0; t < alg.dim(); ++t) {
      rhs((2 * i) * alg.dim() + t, 0) = target(t, 0);
      rhs((2 * i + 1) * alg.dim() + t, 0) = target(t, 0);
    }
  }
  const LstsqResult sol = least_squares(lhs, rhs);
  if (sol.residual > std::sqrt(tol.eq_tol) * std::max(1.0, rhs.frobenius_norm()))
    throw input_error("range basis does not span a unital subalgebra");
  AlgebraElement u = AlgebraElement::zero(alg);
  for (int c = 0; c < r; ++c) u += sol.x(c, 0) * b[c];

  if (distance(u * u, u) > std::sqrt(tol.eq_tol) || distance(u.adjoint(), u) > std::sqrt(tol.eq_tol))
    throw input_error("range basis does not span a unital subalgebra");
  return u;
}

}  // namespace detail

/// Checks that an ambient map is a conditional expectation onto the span of
/// range_basis: compression-invariance, idempotence, positivity, identity on
/// the range, and the bimodule property over the range.
inline ConditionalExpectation verify_expectation(const OperatorMap& e, const Matrix& range_basis,
                                                 const Tolerance& tol = {},
                                                 uint64_t seed = 0x65787065635eedULL) {
  if (!(e.domain() == e.codomain()))
    throw input_error("verify_expectation: map must act on a single algebra");
  const BlockAlgebra& alg = e.domain();
  if (range_basis.rows() != alg.dim())
    throw input_error("verify_expectation: range basis has wrong coordinate length");

  const AlgebraElement unit = detail::span_unit(alg, range_basis, tol);
  double max_res = 0.0;

  // The ambient representation must only read the corner: e = e o compression.
  const OperatorMap compress = OperatorMap::from_function(
      alg, alg, [&](const AlgebraElement& a) { return unit * a * unit; });
  const double comp_res = map_distance(compose(e, compress), e);
  max_res = std::max(max_res, comp_res);
  if (comp_res > tol.eq_tol)
    throw verification_error("map does not factor through compression to the corner");

  const double idem_res = distance_max_abs(e.matrix() * e.matrix(), e.matrix());
  max_res = std::max(max_res, idem_res);
  if (idem_res > tol.eq_tol) throw verification_error("map is not idempotent");

  for (int c = 0; c < range_basis.cols(); ++c) {
    const AlgebraElement b = AlgebraElement::from_vec(alg, range_basis.col(c));
    const double r = distance(e.apply(b), b);
    max_res = std::max(max_res, r);
    if (r > tol.eq_tol) throw verification_error("map is not the identity on its stated range");
  }

  const PositivityVerdict verdict = is_positive_map(e, tol, 8, seed);
  if (!verdict.positive()) throw verification_error("map is not positive");

  // Bimodule property x e(a) y = e(x a y) for x, y in the range.  Exhaustive
  // over basis triples when small, seeded random triples otherwise.
  const int r = range_basis.cols();
  std::vector<AlgebraElement> range_elems;
  range_elems.reserve(r);
  for (int c = 0; c < r; ++c)
    range_elems.push_back(AlgebraElement::from_vec(alg, range_basis.col(c)));

  auto check_triple = [&](const AlgebraElement& x, const AlgebraElement& a,
                          const AlgebraElement& ea, const AlgebraElement& y) {
    const AlgebraElement xay = x * a * y;
    const double res = distance(e.apply(xay), x * ea * y) / std::max(1.0, xay.max_abs());
    max_res = std::max(max_res, res);
    if (res > tol.eq_tol)
      throw verification_error("bimodule property fails over the range");
  };
  if (static_cast<long long>(r) * r * alg.dim() <= 20000) {
    for (int k = 0; k < alg.dim(); ++k) {
      const AlgebraElement a = AlgebraElement::basis(alg, k);
      const AlgebraElement ea = e.apply(a);
      for (const auto& x : range_elems)
        for (const auto& y : range_elems) check_triple(x, a, ea, y);
    }
  } else {
    Rng rng(seed ^ 0x6269ULL);
    auto random_range_elem = [&]() {
      AlgebraElement x = AlgebraElement::zero(alg);
      for (const auto& b : range_elems) x += rng.complex_normal() * b;
      return x;
    };
    for (int t = 0; t < 128; ++t) {
      const AlgebraElement a = AlgebraElement::random(alg, rng);
      check_triple(random_range_elem(), a, e.apply(a), random_range_elem());
    }
  }

  RoleFlags f = e.flags();
  f.expectation = true;
  f.positive = true;
  ConditionalExpectation out;
  out.map = e.with_flags(f);
  out.range_basis = range_basis;
  out.corner_unit = unit;
  out.positivity = verdict;
  out.max_residual = max_res;
  return out;
}

/// The conditional expectation endo o map onto the range of endo, in ambient
/// form.  Requires a non-degenerate transfer operator.
inline ConditionalExpectation expectation_from_transfer(const TransferOperator& t,
                                                        const Tolerance& tol = {}) {
  if (!t.map.flags().transfer)
    throw input_error("expectation_from_transfer: transfer operator is not verified");
  const bool nondeg = t.nondegenerate ? *t.nondegenerate : is_nondegenerate(t, tol);
  if (!nondeg)
    throw verification_error("expectation_from_transfer: transfer operator is degenerate");

  const OperatorMap p = compose(t.endo, t.map);
  const Matrix range_basis = orthonormal_range(t.endo.matrix());
  return verify_expectation(p, range_basis, tol);
}

/// Recovers the transfer operator from a conditional expectation onto the
/// range of endo: map(a) is the preimage of e(endo(1) a endo(1)) supported on
/// the complement of ker(endo).
inline TransferOperator transfer_from_expectation(const OperatorMap& endo,
                                                  const ConditionalExpectation& e,
                                                  const Tolerance& tol = {}) {
  detail::require_endo(endo, "transfer_from_expectation");
  if (!e.map.flags().expectation)
    throw input_error("transfer_from_expectation: expectation is not verified");
  if (!(e.map.domain() == endo.codomain()))
    throw input_error("transfer_from_expectation: expectation acts on the wrong algebra");

  const Matrix endo_range = orthonormal_range(endo.matrix());
  if (subspace_distance(endo_range, e.range_basis) > std::sqrt(tol.eq_tol))
    throw verification_error(
        "transfer_from_expectation: expectation range differs from the range of the endomorphism");

  const BlockAlgebra& a_cod = endo.codomain();
  const IdealBlocks support = annihilator_projection(endo, tol);
  const std::vector<int> idx = support.coordinate_indices();
  Matrix restricted(a_cod.dim(), static_cast<int>(idx.size()));
  for (size_t t = 0; t < idx.size(); ++t)
    restricted.set_col(static_cast<int>(t), endo.matrix().col(idx[t]));
  const PivotedQR qr(restricted);

  Matrix lam_matrix(endo.domain().dim(), a_cod.dim());
  for (int j = 0; j < a_cod.dim(); ++j) {
    const AlgebraElement target = e.map.apply(AlgebraElement::basis(a_cod, j));
    const AlgebraElement x = detail::preimage_on_complement(endo, qr, idx, target);
    lam_matrix.set_col(j, x.vec());
  }

  TransferOperator t = verify_transfer(endo, OperatorMap(a_cod, endo.domain(), std::move(lam_matrix)), tol);
  if (!is_nondegenerate(t, tol))
    throw structural_error("transfer operator recovered from an expectation is degenerate");
  t.nondegenerate = true;

  const OperatorMap round_trip = compose(t.endo, t.map);
  if (map_distance(round_trip, e.map) > std::sqrt(tol.eq_tol))
    throw structural_error("round trip endo o map does not reproduce the expectation");
  return t;
}

}  // namespace transferlab
