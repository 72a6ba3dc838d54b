#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include <transferlab/commutative.hpp>

#include "systems.hpp"

using namespace transferlab;
using namespace testsys;

namespace {

double fiber_sum(const FiniteDynSystem& s, const FiberWeights& w, int point) {
  double sum = 0.0;
  for (size_t k = 0; k < s.delta.size(); ++k)
    if (s.gamma[k] == point) sum += w.rho[k];
  return sum;
}

}  // namespace

TEST_CASE("system accessors on sys_a") {
  const FiniteDynSystem s = sys_a();
  s.validate();
  CHECK(s.in_delta(1));
  CHECK(s.gamma_at(1) == 0);
  CHECK(s.image() == std::vector<int>{0, 2});
  CHECK(s.fiber(0) == std::vector<int>{0, 1});
  CHECK(s.fiber(1).empty());
  CHECK(s.fiber(2) == std::vector<int>{2});

  const FiniteDynSystem b = sys_b();
  CHECK_FALSE(b.in_delta(1));
  CHECK_THROWS_AS(b.gamma_at(1), input_error);
}

TEST_CASE("system validation rejects malformed data") {
  CHECK_THROWS_AS((FiniteDynSystem{0, {}, {}}.validate()), input_error);
  CHECK_THROWS_AS((FiniteDynSystem{2, {1, 0}, {0, 0}}.validate()), input_error);
  CHECK_THROWS_AS((FiniteDynSystem{2, {0}, {2}}.validate()), input_error);
  CHECK_THROWS_AS((FiniteDynSystem{2, {0}, {0, 1}}.validate()), input_error);
  const FiberWeights short_w{{0.5}};
  CHECK_THROWS_AS(short_w.validate(sys_a()), input_error);
  const FiberWeights negative_w{{0.5, -0.1, 1.0}};
  CHECK_THROWS_AS(negative_w.validate(sys_a()), input_error);
}

TEST_CASE("composition endomorphism of sys_a") {
  const OperatorMap alpha = endo_from_system(sys_a());
  Matrix expected(3, 3);
  expected(0, 0) = expected(1, 0) = expected(2, 2) = 1.0;
  CHECK(distance_max_abs(alpha.matrix(), expected) == 0.0);

  // The indicator of point 0 pulls back to the indicator of its fiber.
  const BlockAlgebra alg = alpha.domain();
  const AlgebraElement pulled = alpha.apply(AlgebraElement::basis(alg, 0));
  CHECK(distance(pulled, AlgebraElement::basis(alg, 0) + AlgebraElement::basis(alg, 1)) == 0.0);
}

TEST_CASE("weighted fiber sums on sys_a") {
  const FiniteDynSystem s = sys_a();
  const TransferOperator t = transfer_from_weights(s, sys_a_weights());

  Matrix expected(3, 3);
  expected(0, 0) = 0.3;
  expected(0, 1) = 0.7;
  expected(2, 2) = 1.0;
  CHECK(distance_max_abs(t.map.matrix(), expected) == 0.0);

  AlgebraElement a = AlgebraElement::zero(t.map.domain());
  a.block(0)(0, 0) = 2.0;
  a.block(1)(0, 0) = 4.0;
  a.block(2)(0, 0) = -1.0;
  const AlgebraElement out = t.map.apply(a);
  CHECK(std::abs(out.block(0)(0, 0) - cplx(3.4, 0.0)) < 1e-15);
  CHECK(std::abs(out.block(1)(0, 0)) == 0.0);
  CHECK(std::abs(out.block(2)(0, 0) - cplx(-1.0, 0.0)) == 0.0);

  CHECK(is_nondegenerate(t));
  CHECK(transfer_norm(t) == 1.0);
}

TEST_CASE("weights round-trip through the operator") {
  const FiniteDynSystem s = sys_a();
  const TransferOperator t = transfer_from_weights(s, sys_a_weights());
  CHECK(weights_from_transfer(s, t).rho == sys_a_weights().rho);

  CHECK_THROWS_MATCHES(weights_from_transfer(sys_b(), t), input_error,
                       Catch::Matchers::MessageMatches(
                           Catch::Matchers::ContainsSubstring("different system")));
}

TEST_CASE("parameter space of non-degenerate operators") {
  const FiberDecomposition d = nondegenerate_parameter_space(sys_a());
  CHECK(d.image_points == std::vector<int>{0, 2});
  REQUIRE(d.fibers.size() == 2);
  CHECK(d.fibers[0] == std::vector<int>{0, 1});
  CHECK(d.fibers[1] == std::vector<int>{2});
  CHECK(d.simplex_dims == std::vector<int>{1, 0});
  CHECK(d.total_dimension == 1);

  CHECK(nondegenerate_parameter_space(sys_b()).total_dimension == 0);
}

TEST_CASE("fiber-stochastic sampling is seeded and lands in the simplex product") {
  const FiniteDynSystem s = sys_a();
  const TransferOperator t1 = sample_nondegenerate(s, 7);
  const TransferOperator t2 = sample_nondegenerate(s, 7);
  const TransferOperator t3 = sample_nondegenerate(s, 8);
  CHECK(map_distance(t1.map, t2.map) == 0.0);
  CHECK(map_distance(t1.map, t3.map) > 1e-6);
  CHECK(t1.nondegenerate.value());

  Rng rng(123);
  for (int trial = 0; trial < 20; ++trial) {
    const FiniteDynSystem r = random_system(rng, 8);
    if (r.delta.empty()) continue;
    const TransferOperator t = sample_nondegenerate(r, rng.raw());
    const FiberWeights w = weights_from_transfer(r, t);
    for (double v : w.rho) {
      CHECK(v > 0.0);
      CHECK(v <= 1.0);
    }
    for (int x : r.image()) CHECK(std::abs(fiber_sum(r, w, x) - 1.0) < 1e-12);
  }
}

TEST_CASE("complete operators exist exactly for injective systems") {
  CHECK_FALSE(complete_exists_commutative(sys_a()));
  CHECK(complete_exists_commutative(sys_b()));

  for (const FiniteDynSystem& s : enumerate_systems(3)) {
    std::vector<int> img = s.gamma;
    std::sort(img.begin(), img.end());
    const bool injective = std::adjacent_find(img.begin(), img.end()) == img.end();
    CHECK(complete_exists_commutative(s) == injective);
  }
}

TEST_CASE("the canonical section covers the image fiberwise") {
  const FiniteDynSystem s = sys_a();
  const Section sec = section_check(s);
  CHECK(sec.image_points == std::vector<int>{0, 2});
  REQUIRE(sec.phi.size() == 2);
  for (size_t i = 0; i < sec.phi.size(); ++i) {
    CHECK_FALSE(sec.phi[i].empty());
    for (int y : sec.phi[i]) CHECK(s.gamma_at(y) == sec.image_points[i]);
  }
}

TEST_CASE("enumeration covers all partial maps") {
  CHECK(enumerate_systems(1).size() == 2);
  CHECK(enumerate_systems(2).size() == 9);
  CHECK(enumerate_systems(3).size() == 64);
  CHECK(enumerate_systems(4).size() == 625);
  CHECK_THROWS_AS(enumerate_systems(0), input_error);

  int hereditary = 0;
  for (const FiniteDynSystem& s : enumerate_systems(2)) {
    s.validate();
    if (complete_exists_commutative(s)) ++hereditary;
  }
  CHECK(hereditary == 7);
}

TEST_CASE("the empty-domain system") {
  const FiniteDynSystem s{2, {}, {}};
  const OperatorMap alpha = endo_from_system(s);
  CHECK(alpha.matrix().max_abs() == 0.0);

  CHECK(complete_exists_commutative(s));
  const TransferOperator t = complete_transfer(alpha);
  CHECK(transfer_norm(t) == 0.0);
  CHECK(t.nondegenerate.value());
  CHECK(t.complete.value());

  CHECK(distance(kernel_unit(alpha), AlgebraElement::identity(alpha.domain())) == 0.0);
  CHECK(nondegenerate_parameter_space(s).image_points.empty());
  CHECK_THROWS_AS(sample_nondegenerate(s, 1), input_error);
}
