#include <catch2/catch_amalgamated.hpp>

#include <transferlab/eig.hpp>
#include <transferlab/rng.hpp>

using namespace transferlab;

namespace {

Matrix random_hermitian(Rng& rng, int n) {
  const Matrix g = rng.gaussian_matrix(n, n);
  Matrix h = g + g.adjoint();
  h *= 0.5;
  return h;
}

}  // namespace

TEST_CASE("eigenvalues of a diagonal matrix are its entries, sorted") {
  Matrix d(4, 4);
  d(0, 0) = 3.0;
  d(1, 1) = -1.0;
  d(2, 2) = 0.5;
  d(3, 3) = 3.0;
  const EigResult r = hermitian_eig(d);
  REQUIRE(r.values.size() == 4);
  CHECK(r.values[0] == Catch::Approx(-1.0));
  CHECK(r.values[1] == Catch::Approx(0.5));
  CHECK(r.values[2] == Catch::Approx(3.0));
  CHECK(r.values[3] == Catch::Approx(3.0));
}

TEST_CASE("2x2 hermitian closed form") {
  // Eigenvalues of [[a, b],[conj(b), c]]: (a+c)/2 +- sqrt(((a-c)/2)^2 + |b|^2).
  const Matrix h{{cplx(1, 0), cplx(2, 1)}, {cplx(2, -1), cplx(-1, 0)}};
  const double disc = std::sqrt(1.0 + 5.0);
  const EigResult r = hermitian_eig(h);
  CHECK(r.values[0] == Catch::Approx(-disc).epsilon(1e-12));
  CHECK(r.values[1] == Catch::Approx(disc).epsilon(1e-12));
}

TEST_CASE("reconstruction A = V diag(w) V* and orthonormality") {
  Rng rng(1234);
  for (int n : {1, 2, 5, 9}) {
    const Matrix h = random_hermitian(rng, n);
    const EigResult r = hermitian_eig(h);

    Matrix rebuilt(n, n);
    for (int k = 0; k < n; ++k) {
      const Matrix v = r.vectors.col(k);
      rebuilt += cplx(r.values[k], 0.0) * (v * v.adjoint());
    }
    CHECK(distance_max_abs(rebuilt, h) < 1e-11 * std::max(1.0, h.max_abs()));
    CHECK(distance_max_abs(r.vectors.adjoint() * r.vectors, Matrix::identity(n)) < 1e-12);
    for (int k = 1; k < n; ++k) CHECK(r.values[k - 1] <= r.values[k]);
  }
}

TEST_CASE("min and max eigenvalue helpers") {
  Rng rng(77);
  const Matrix g = rng.gaussian_matrix(4, 4);
  const Matrix psd = g * g.adjoint();
  CHECK(min_eigenvalue(psd) >= -1e-12);
  CHECK(max_eigenvalue(psd) > 0.0);

  Matrix shifted = psd;
  for (int i = 0; i < 4; ++i) shifted(i, i) -= 100.0;
  CHECK(min_eigenvalue(shifted) == Catch::Approx(min_eigenvalue(psd) - 100.0).margin(1e-9));
}

TEST_CASE("cholesky certifies positive definiteness") {
  Rng rng(5);
  const Matrix g = rng.gaussian_matrix(5, 5);
  Matrix pd = g * g.adjoint() + Matrix::identity(5) * cplx(0.1, 0.0);
  CHECK(cholesky_succeeds(pd));

  Matrix indef = pd;
  indef(0, 0) = -1.0;
  CHECK_FALSE(cholesky_succeeds(indef));

  CHECK(is_psd(g * g.adjoint(), 1e-10));
  Matrix neg = Matrix::identity(3) * cplx(-1e-3, 0.0);
  CHECK_FALSE(is_psd(neg, 1e-10));
}

TEST_CASE("non-square input is rejected and empty input is trivial") {
  CHECK_THROWS_AS(hermitian_eig(Matrix(2, 3)), input_error);
  CHECK(min_eigenvalue(Matrix(0, 0)) == 0.0);
  CHECK(is_psd(Matrix(0, 0), 1e-10));
}
