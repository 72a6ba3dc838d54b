#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>

#include "transferlab/matrix.hpp"

namespace transferlab {

/// Seeded PRNG for all randomized operations.  mt19937_64 supplies the raw
/// stream; the uniform / normal mappings are fixed here so that seeded runs
/// reproduce across standard library implementations.
class Rng {
public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  double uniform() {  // [0, 1)
    return static_cast<double>(gen_() >> 11) * 0x1.0p-53;
  }

  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double t = 2.0 * std::numbers::pi * u2;
    spare_ = r * std::sin(t);
    have_spare_ = true;
    return r * std::cos(t);
  }

  cplx complex_normal() {
    const double re = normal();
    const double im = normal();
    return cplx(re, im) * (1.0 / std::numbers::sqrt2);
  }

  double exponential() {
    double u = uniform();
    while (u <= 0.0) u = uniform();
    return -std::log(u);
  }

  std::uint64_t raw() { return gen_(); }

  Matrix gaussian_matrix(int rows, int cols) {
    Matrix m(rows, cols);
    for (int i = 0; i < rows; ++i)
      for (int j = 0; j < cols; ++j) m(i, j) = complex_normal();
    return m;
  }

private:
  std::mt19937_64 gen_;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

}  // namespace transferlab
