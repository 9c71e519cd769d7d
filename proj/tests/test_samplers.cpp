#include <doctest.h>

#include <cmath>

#include "sphqmc/samplers.hpp"

using namespace sphqmc;

TEST_CASE("sampler kind names round trip") {
  for (SamplerKind k :
       {SamplerKind::spherical_eig, SamplerKind::spherical_dpp,
        SamplerKind::iid_uniform, SamplerKind::equal_area_jitter,
        SamplerKind::fibonacci}) {
    CHECK(sampler_kind_from_string(to_string(k)) == k);
  }
  CHECK_THROWS_AS(sampler_kind_from_string("bogus"), std::invalid_argument);
}

TEST_CASE("samplers are deterministic per (seed, stream)") {
  for (SamplerKind k :
       {SamplerKind::spherical_eig, SamplerKind::spherical_dpp,
        SamplerKind::iid_uniform, SamplerKind::equal_area_jitter,
        SamplerKind::fibonacci}) {
    const SamplerSpec spec{k, 12, 42, 3};
    const Configuration a = sample(spec);
    const Configuration b = sample(spec);
    REQUIRE(a.n() == 12);
    for (std::size_t i = 0; i < a.n(); ++i) {
      CHECK(a.points[i].x == b.points[i].x);
      CHECK(a.points[i].y == b.points[i].y);
      CHECK(a.points[i].z == b.points[i].z);
    }
  }
}

TEST_CASE("fibonacci ignores the rng fields") {
  const Configuration a = sample({SamplerKind::fibonacci, 9, 1, 2});
  const Configuration b = sample({SamplerKind::fibonacci, 9, 77, 5});
  for (std::size_t i = 0; i < 9; ++i) {
    CHECK(a.points[i].x == b.points[i].x);
  }
  const Configuration single = sample_fibonacci(1);
  CHECK(single.n() == 1);
  CHECK(single.points[0].z == doctest::Approx(0.0));
}

TEST_CASE("equal area partition has exact cell areas") {
  for (std::size_t n : {1UL, 2UL, 3UL, 4UL, 5UL, 7UL, 12UL, 40UL, 101UL,
                        400UL, 1000UL}) {
    const auto cells = equal_area_partition(n);
    REQUIRE(cells.size() == n);
    const double want = 4.0 * M_PI / static_cast<double>(n);
    double total = 0.0;
    for (const auto& cell : cells) {
      CHECK(std::abs(cell.area() - want) <= 1e-9);
      total += cell.area();
      CHECK(cell.z_lo < cell.z_hi);
      CHECK(cell.phi_lo < cell.phi_hi);
    }
    CHECK(total == doctest::Approx(4.0 * M_PI).epsilon(1e-12));
  }
}

TEST_CASE("jitter points land inside their cells") {
  RngStream rng(5, 0);
  const std::size_t n = 37;
  const auto cells = equal_area_partition(n);
  const Configuration c = sample_equal_area_jitter(n, rng);
  REQUIRE(c.n() == n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& p = c.points[i];
    const auto& cell = cells[i];
    CHECK(p.z >= cell.z_lo - 1e-12);
    CHECK(p.z <= cell.z_hi + 1e-12);
    double phi = std::atan2(p.y, p.x);
    if (phi < 0) phi += 2.0 * M_PI;
    if (cell.phi_hi < 2.0 * M_PI - 1e-12 || cell.phi_lo > 1e-12) {
      CHECK(phi >= cell.phi_lo - 1e-9);
      CHECK(phi <= cell.phi_hi + 1e-9);
    }
  }
}

TEST_CASE("n = 1 draws are single points on the sphere") {
  for (SamplerKind k :
       {SamplerKind::spherical_eig, SamplerKind::spherical_dpp,
        SamplerKind::iid_uniform, SamplerKind::equal_area_jitter}) {
    const Configuration c = sample({k, 1, 11, 0});
    REQUIRE(c.n() == 1);
    const auto& p = c.points[0];
    CHECK(std::abs(p.x * p.x + p.y * p.y + p.z * p.z - 1.0) <= 1e-12);
  }
}

TEST_CASE("eig sampler produces n points with distinct locations") {
  RngStream rng(3, 9);
  const Configuration c = sample_spherical_eig(24, rng);
  REQUIRE(c.n() == 24);
  double min_d = 10.0;
  for (std::size_t i = 0; i < c.n(); ++i) {
    for (std::size_t j = i + 1; j < c.n(); ++j) {
      min_d = std::min(min_d, c.points[i].chordal_distance(c.points[j]));
    }
  }
  CHECK(min_d > 0.0);
}

TEST_CASE("invalid n rejected") {
  RngStream rng(1, 0);
  CHECK_THROWS_AS(sample_iid_uniform(0, rng), std::invalid_argument);
  CHECK_THROWS_AS(sample_fibonacci(0), std::invalid_argument);
  CHECK_THROWS_AS(sample({SamplerKind::iid_uniform, 0, 0, 0}),
                  std::invalid_argument);
}
