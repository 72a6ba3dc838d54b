#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "transferlab/algebra.hpp"
#include "transferlab/qr.hpp"

namespace transferlab {

/// Verification flags carried by a map.  Flags are only set by verification
/// routines, never by raw construction.
struct RoleFlags {
  bool endomorphism = false;  // verified *-homomorphism
  bool transfer = false;
  bool expectation = false;
  bool positive = false;
};

/// A linear map between block algebras, stored as its coordinate matrix:
/// column c is vec(phi(basis_c)).
class OperatorMap {
public:
  OperatorMap() = default;
  OperatorMap(BlockAlgebra domain, BlockAlgebra codomain, Matrix m)
      : domain_(std::move(domain)), codomain_(std::move(codomain)), matrix_(std::move(m)) {
    if (matrix_.rows() != codomain_.dim() || matrix_.cols() != domain_.dim())
      throw input_error("OperatorMap: matrix shape does not match algebras");
  }

  static OperatorMap identity(const BlockAlgebra& a) {
    return OperatorMap(a, a, Matrix::identity(a.dim()));
  }

  static OperatorMap zero(const BlockAlgebra& dom, const BlockAlgebra& cod) {
    return OperatorMap(dom, cod, Matrix(cod.dim(), dom.dim()));
  }

  /// Build the coordinate matrix by applying fn to every basis element.
  template <typename Fn>
  static OperatorMap from_function(const BlockAlgebra& dom, const BlockAlgebra& cod, Fn&& fn) {
    Matrix m(cod.dim(), dom.dim());
    for (int c = 0; c < dom.dim(); ++c) {
      const AlgebraElement img = fn(AlgebraElement::basis(dom, c));
      if (!(img.algebra() == cod)) throw input_error("from_function: image in wrong algebra");
      m.set_col(c, img.vec());
    }
    return OperatorMap(dom, cod, std::move(m));
  }

  const BlockAlgebra& domain() const { return domain_; }
  const BlockAlgebra& codomain() const { return codomain_; }
  const Matrix& matrix() const { return matrix_; }
  const RoleFlags& flags() const { return flags_; }
  RoleFlags& flags() { return flags_; }

  AlgebraElement apply(const AlgebraElement& a) const {
    if (!(a.algebra() == domain_)) throw input_error("apply: element not in domain");
    return AlgebraElement::from_vec(codomain_, matrix_ * a.vec());
  }

  AlgebraElement operator()(const AlgebraElement& a) const { return apply(a); }

  OperatorMap with_flags(RoleFlags f) const {
    OperatorMap m = *this;
    m.flags_ = f;
    return m;
  }

private:
  BlockAlgebra domain_;
  BlockAlgebra codomain_;
  Matrix matrix_;
  RoleFlags flags_;
};

/// f after g.
inline OperatorMap compose(const OperatorMap& f, const OperatorMap& g) {
  if (!(f.domain() == g.codomain())) throw input_error("compose: domain/codomain mismatch");
  return OperatorMap(g.domain(), f.codomain(), f.matrix() * g.matrix());
}

inline double map_distance(const OperatorMap& a, const OperatorMap& b) {
  return distance_max_abs(a.matrix(), b.matrix());
}

/// Checks multiplicativity, *-preservation and linearity-consistency on all
/// basis pairs.
inline bool is_star_homomorphism(const OperatorMap& phi, const Tolerance& tol = {}) {
  const BlockAlgebra& dom = phi.domain();
  const int n = dom.dim();
  std::vector<AlgebraElement> img;
  img.reserve(n);
  for (int i = 0; i < n; ++i) img.push_back(phi.apply(AlgebraElement::basis(dom, i)));
  for (int i = 0; i < n; ++i) {
    const AlgebraElement ei = AlgebraElement::basis(dom, i);
    if (distance(phi.apply(ei.adjoint()), img[i].adjoint()) > tol.eq_tol) return false;
    for (int j = 0; j < n; ++j) {
      const AlgebraElement ej = AlgebraElement::basis(dom, j);
      if (distance(phi.apply(ei * ej), img[i] * img[j]) > tol.eq_tol) return false;
    }
  }
  return true;
}

/// Returns a copy flagged as a verified *-homomorphism; throws
/// verification_error if the check fails.
inline OperatorMap verify_star_homomorphism(const OperatorMap& phi, const Tolerance& tol = {}) {
  if (!is_star_homomorphism(phi, tol))
    throw verification_error("map is not a *-homomorphism at the requested tolerance");
  RoleFlags f = phi.flags();
  f.endomorphism = true;
  return phi.with_flags(f);
}

enum class PositivityKind { certified_cp, sampled_positive, not_positive };

struct PositivityVerdict {
  PositivityKind kind = PositivityKind::not_positive;
  std::optional<AlgebraElement> witness;       // x with phi(x x*) not positive
  std::optional<double> choi_min_eigenvalue;   // when the eigensolve ran

  bool positive() const { return kind != PositivityKind::not_positive; }
};

inline std::string to_string(PositivityKind k) {
  switch (k) {
    case PositivityKind::certified_cp: return "certified_cp";
    case PositivityKind::sampled_positive: return "sampled_positive";
    default: return "not_positive";
  }
}

/// Blockwise Choi test plus positivity sampling.
///
/// certified_cp: every per-block Choi matrix is psd (complete positivity).
/// sampled_positive: Choi test failed or was inconclusive but phi(x x*) was
/// positive for the identity and `trials` random x.
/// not_positive: a witness x with phi(x x*) not positive was found.
inline PositivityVerdict is_positive_map(const OperatorMap& phi, const Tolerance& tol = {},
                                         int trials = 8, uint64_t seed = 0x7261646f6d5eedULL) {
  const BlockAlgebra& dom = phi.domain();
  const BlockAlgebra& cod = phi.codomain();

  PositivityVerdict verdict;

  // Complete-positivity certificate: for each domain block, the Choi matrix
  // of the compression to that block, with codomain coordinates embedded as a
  // direct sum.  phi is cp iff all of them are psd.
  bool all_psd = true;
  std::optional<double> min_eig_seen;
  const int cod_total = [&] {
    int s = 0;
    for (int k = 0; k < cod.num_blocks(); ++k) s += cod.block_dim(k);
    return s;
  }();
  for (int k = 0; k < dom.num_blocks() && all_psd; ++k) {
    const int d = dom.block_dim(k);
    const int off = dom.block_offset(k);
    Matrix choi(d * cod_total, d * cod_total);
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j) {
        const AlgebraElement img =
            AlgebraElement::from_vec(cod, phi.matrix().col(off + i * d + j));
        int row0 = 0;
        for (int b = 0; b < cod.num_blocks(); ++b) {
          const int db = cod.block_dim(b);
          for (int p = 0; p < db; ++p)
            for (int q = 0; q < db; ++q)
              choi(i * cod_total + row0 + p, j * cod_total + row0 + q) = img.block(b)(p, q);
          row0 += db;
        }
      }
    if (cholesky_succeeds(choi + Matrix::identity(choi.rows()) * cplx(tol.psd_tol, 0.0))) continue;
    const double lam = min_eigenvalue(choi);
    min_eig_seen = min_eig_seen ? std::min(*min_eig_seen, lam) : lam;
    if (lam < -tol.psd_tol) all_psd = false;
  }
  if (all_psd) {
    verdict.kind = PositivityKind::certified_cp;
    verdict.choi_min_eigenvalue = min_eig_seen;
    return verdict;
  }
  verdict.choi_min_eigenvalue = min_eig_seen;

  // Not cp; sample phi(x x*) >= 0.  Deterministic trials first: the identity,
  // then every basis element; then random Gaussian elements.
  Rng rng(seed);
  auto check = [&](const AlgebraElement& x) -> bool {
    const AlgebraElement v = x * x.adjoint();
    if (is_positive_element(phi.apply(v), tol)) return true;
    verdict.witness = x;
    return false;
  };
  if (!check(AlgebraElement::identity(dom))) {
    verdict.kind = PositivityKind::not_positive;
    return verdict;
  }
  for (int i = 0; i < dom.dim(); ++i)
    if (!check(AlgebraElement::basis(dom, i))) {
      verdict.kind = PositivityKind::not_positive;
      return verdict;
    }
  for (int t = 0; t < trials; ++t)
    if (!check(AlgebraElement::random(dom, rng))) {
      verdict.kind = PositivityKind::not_positive;
      return verdict;
    }
  verdict.kind = PositivityKind::sampled_positive;
  return verdict;
}

/// Kernel of a verified *-homomorphism as a block-sum ideal.  Cross-checks
/// the structural answer against the numerical null-space dimension of the
/// coordinate matrix.
inline IdealBlocks kernel_blocks(const OperatorMap& phi, const Tolerance& tol = {}) {
  if (!phi.flags().endomorphism)
    throw input_error("kernel_blocks: map must be a verified *-homomorphism");
  const BlockAlgebra& dom = phi.domain();
  std::vector<int> dead;
  for (int k = 0; k < dom.num_blocks(); ++k) {
    const int d = dom.block_dim(k);
    const int off = dom.block_offset(k);
    bool all_zero = true;
    for (int t = 0; t < d * d && all_zero; ++t)
      if (phi.matrix().col(off + t).max_abs() > tol.eq_tol) all_zero = false;
    if (all_zero) dead.push_back(k);
  }
  IdealBlocks ker(dom, dead);

  PivotedQR qr(phi.matrix());
  const int null_dim = dom.dim() - qr.rank_rel(1e-6);
  if (null_dim != ker.coordinate_dim())
    throw structural_error(
        "kernel of *-homomorphism is not a block sum: null space dimension " +
        std::to_string(null_dim) + " != structural kernel dimension " +
        std::to_string(ker.coordinate_dim()));
  return ker;
}

}  // namespace transferlab
