#include <doctest.h>

#include <cmath>
#include <vector>

#include "sphqmc/rng.hpp"

using sphqmc::RngStream;

TEST_CASE("identical (seed, stream) reproduces the draw sequence") {
  RngStream a(123, 7), b(123, 7);
  for (int i = 0; i < 1000; ++i) {
    CHECK(a.next_u64() == b.next_u64());
  }
  RngStream c(123, 7), d(123, 7);
  for (int i = 0; i < 100; ++i) {
    CHECK(c.normal() == d.normal());
    CHECK(c.uniform() == d.uniform());
  }
}

TEST_CASE("different streams decorrelate") {
  RngStream a(123, 0), b(123, 1), c(124, 0);
  int same_ab = 0, same_ac = 0;
  for (int i = 0; i < 64; ++i) {
    const auto x = a.next_u64();
    if (x == b.next_u64()) ++same_ab;
    if (x == c.next_u64()) ++same_ac;
  }
  CHECK(same_ab == 0);
  CHECK(same_ac == 0);
}

TEST_CASE("uniform lies in [0,1) and has sane moments") {
  RngStream rng(5, 0);
  double sum = 0.0;
  const int n = 100000;
  for (int i = 0; i < n; ++i) {
    const double u = rng.uniform();
    REQUIRE(u >= 0.0);
    REQUIRE(u < 1.0);
    sum += u;
  }
  CHECK(std::abs(sum / n - 0.5) < 4.0 / std::sqrt(12.0 * n));
}

TEST_CASE("normal moments") {
  RngStream rng(9, 3);
  const int n = 200000;
  double s1 = 0.0, s2 = 0.0;
  for (int i = 0; i < n; ++i) {
    const double x = rng.normal();
    s1 += x;
    s2 += x * x;
  }
  const double mean = s1 / n;
  const double var = s2 / n - mean * mean;
  CHECK(std::abs(mean) < 4.0 / std::sqrt(static_cast<double>(n)));
  CHECK(std::abs(var - 1.0) < 4.0 * std::sqrt(2.0 / n));
}

TEST_CASE("complex normal splits variance between parts") {
  RngStream rng(2, 11);
  const int n = 100000;
  double vr = 0.0, vi = 0.0;
  for (int i = 0; i < n; ++i) {
    const auto z = rng.complex_normal(M_SQRT1_2);
    vr += z.real() * z.real();
    vi += z.imag() * z.imag();
  }
  vr /= n;
  vi /= n;
  CHECK(std::abs(vr - 0.5) < 0.02);
  CHECK(std::abs(vi - 0.5) < 0.02);
  CHECK(vr / vi > 0.97);
  CHECK(vr / vi < 1.03);
}
