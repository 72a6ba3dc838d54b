#pragma once

#include <algorithm>
#include <vector>

#include "transferlab/transfer.hpp"

namespace transferlab {

/// A dynamical system on a finite discrete space X = {0, ..., n_points-1}:
/// a partial map gamma defined on the subset delta.  delta and gamma are
/// aligned: gamma[k] is the image of delta[k].
struct FiniteDynSystem {
  int n_points = 0;
  std::vector<int> delta;
  std::vector<int> gamma;

  void validate() const {
    if (n_points <= 0) throw input_error("system: n_points must be positive");
    if (delta.size() != gamma.size()) throw input_error("system: delta/gamma length mismatch");
    int prev = -1;
    for (int x : delta) {
      if (x <= prev) throw input_error("system: delta must be strictly increasing");
      if (x < 0 || x >= n_points) throw input_error("system: delta point out of range");
      prev = x;
    }
    for (int y : gamma)
      if (y < 0 || y >= n_points) throw input_error("system: gamma value out of range");
  }

  bool in_delta(int x) const {
    return std::binary_search(delta.begin(), delta.end(), x);
  }

  int gamma_at(int x) const {
    const auto it = std::lower_bound(delta.begin(), delta.end(), x);
    if (it == delta.end() || *it != x) throw input_error("gamma_at: point outside delta");
    return gamma[static_cast<size_t>(it - delta.begin())];
  }

  std::vector<int> image() const {
    std::vector<int> img = gamma;
    std::sort(img.begin(), img.end());
    img.erase(std::unique(img.begin(), img.end()), img.end());
    return img;
  }

  /// Fiber over x: all y in delta with gamma(y) = x.
  std::vector<int> fiber(int x) const {
    std::vector<int> f;
    for (size_t k = 0; k < delta.size(); ++k)
      if (gamma[k] == x) f.push_back(delta[k]);
    return f;
  }
};

/// Nonnegative weight per point of delta, aligned with FiniteDynSystem::delta.
struct FiberWeights {
  std::vector<double> rho;

  void validate(const FiniteDynSystem& s) const {
    if (rho.size() != s.delta.size()) throw input_error("weights: length must match delta");
    for (double w : rho)
      if (!(w >= 0.0)) throw input_error("weights: negative or non-finite weight");
  }
};

/// The canonical full section over the image: phi(x) = fiber over x.
struct Section {
  std::vector<int> image_points;
  std::vector<std::vector<int>> phi;  // aligned with image_points
};

struct FiberDecomposition {
  std::vector<int> image_points;
  std::vector<std::vector<int>> fibers;  // aligned with image_points
  std::vector<int> simplex_dims;         // |fiber| - 1 per fiber
  int total_dimension = 0;               // sum of simplex dims
};

/// Composition endomorphism on C(X): (alpha a)(x) = a(gamma(x)) on delta and
/// 0 outside.  Returned verified.
inline OperatorMap endo_from_system(const FiniteDynSystem& s, const Tolerance& tol = {}) {
  s.validate();
  const BlockAlgebra alg = BlockAlgebra::commutative(s.n_points);
  Matrix m(s.n_points, s.n_points);
  for (size_t k = 0; k < s.delta.size(); ++k) m(s.delta[k], s.gamma[k]) = 1.0;
  return verify_star_homomorphism(OperatorMap(alg, alg, std::move(m)), tol);
}

/// The weighted fiber-sum operator: (map a)(x) = sum over the fiber of x of
/// rho(y) a(y) on the image of gamma, 0 elsewhere.  Returned verified.
inline TransferOperator transfer_from_weights(const FiniteDynSystem& s, const FiberWeights& w,
                                              const Tolerance& tol = {}) {
  s.validate();
  w.validate(s);
  const OperatorMap endo = endo_from_system(s, tol);
  Matrix m(s.n_points, s.n_points);
  for (size_t k = 0; k < s.delta.size(); ++k) m(s.gamma[k], s.delta[k]) = w.rho[k];
  return verify_transfer(endo, OperatorMap(endo.codomain(), endo.domain(), std::move(m)), tol);
}

/// Reads the weights back off a transfer operator: rho(y) = (map delta_y)(gamma(y)).
inline FiberWeights weights_from_transfer(const FiniteDynSystem& s, const TransferOperator& t,
                                          const Tolerance& tol = {}) {
  s.validate();
  if (!t.map.flags().transfer)
    throw input_error("weights_from_transfer: transfer operator is not verified");
  if (t.endo.domain().dim() != s.n_points ||
      map_distance(t.endo, endo_from_system(s, tol)) > tol.eq_tol)
    throw input_error("weights_from_transfer: operator belongs to a different system");
  FiberWeights w;
  w.rho.reserve(s.delta.size());
  for (size_t k = 0; k < s.delta.size(); ++k)
    w.rho.push_back(t.map.matrix()(s.gamma[k], s.delta[k]).real());
  return w;
}

/// Fiber partition of delta over the image, with per-fiber simplex dimension.
/// Non-degenerate transfer operators are exactly the fiber-stochastic weight
/// choices, so the parameter space is a product of simplices.
inline FiberDecomposition nondegenerate_parameter_space(const FiniteDynSystem& s) {
  s.validate();
  FiberDecomposition out;
  out.image_points = s.image();
  for (int x : out.image_points) {
    out.fibers.push_back(s.fiber(x));
    const int dim = static_cast<int>(out.fibers.back().size()) - 1;
    out.simplex_dims.push_back(dim);
    out.total_dimension += dim;
  }
  return out;
}

/// Uniform sample from the product of fiber simplices (normalized
/// exponentials per fiber).  The result always passes is_nondegenerate.
inline TransferOperator sample_nondegenerate(const FiniteDynSystem& s, uint64_t seed,
                                             const Tolerance& tol = {}) {
  s.validate();
  if (s.delta.empty()) throw input_error("sample_nondegenerate: delta is empty");
  Rng rng(seed);
  FiberWeights w;
  w.rho.assign(s.delta.size(), 0.0);
  for (int x : s.image()) {
    const std::vector<int> f = s.fiber(x);
    std::vector<double> e(f.size());
    double total = 0.0;
    for (double& v : e) {
      v = rng.exponential();
      total += v;
    }
    for (size_t k = 0; k < f.size(); ++k) {
      const auto it = std::lower_bound(s.delta.begin(), s.delta.end(), f[k]);
      w.rho[static_cast<size_t>(it - s.delta.begin())] = e[k] / total;
    }
  }
  TransferOperator t = transfer_from_weights(s, w, tol);
  if (!is_nondegenerate(t, tol))
    throw structural_error("fiber-stochastic sample failed the non-degeneracy check");
  t.nondegenerate = true;
  return t;
}

/// A complete transfer operator exists iff gamma is injective on delta.
/// Cross-checked against the hereditary-range criterion on the induced
/// endomorphism.
inline bool complete_exists_commutative(const FiniteDynSystem& s, const Tolerance& tol = {}) {
  s.validate();
  std::vector<int> img = s.gamma;
  std::sort(img.begin(), img.end());
  const bool injective = std::adjacent_find(img.begin(), img.end()) == img.end();
  const bool hereditary = is_hereditary_range(endo_from_system(s, tol), tol);
  if (injective != hereditary)
    throw structural_error("injectivity of gamma disagrees with the hereditary-range criterion");
  return injective;
}

/// The canonical full section phi(x) = fiber over x.  On a finite discrete
/// space it is automatically lower semicontinuous and nonempty-valued on the
/// image, so a section in the required sense always exists once the image is
/// nonempty.
inline Section section_check(const FiniteDynSystem& s) {
  s.validate();
  Section out;
  out.image_points = s.image();
  for (int x : out.image_points) out.phi.push_back(s.fiber(x));
  return out;
}

/// All systems on n_points: each point is either outside delta or mapped to
/// one of n_points targets, (n_points+1)^n_points in total.
inline std::vector<FiniteDynSystem> enumerate_systems(int n_points) {
  if (n_points <= 0) throw input_error("enumerate_systems: n_points must be positive");
  uint64_t count = 1;
  for (int i = 0; i < n_points; ++i) {
    count *= static_cast<uint64_t>(n_points) + 1;
    if (count > 2000000) throw input_error("enumerate_systems: too many systems to enumerate");
  }
  std::vector<FiniteDynSystem> out;
  out.reserve(count);
  std::vector<int> choice(n_points, 0);  // 0 = outside delta, k+1 = gamma value k
  for (uint64_t it = 0; it < count; ++it) {
    FiniteDynSystem s;
    s.n_points = n_points;
    for (int x = 0; x < n_points; ++x)
      if (choice[x] > 0) {
        s.delta.push_back(x);
        s.gamma.push_back(choice[x] - 1);
      }
    out.push_back(std::move(s));
    for (int x = 0; x < n_points; ++x) {
      if (++choice[x] <= n_points) break;
      choice[x] = 0;
    }
  }
  return out;
}

}  // namespace transferlab
