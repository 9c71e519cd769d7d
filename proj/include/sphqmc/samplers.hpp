#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "sphqmc/geometry.hpp"
#include "sphqmc/rng.hpp"

namespace sphqmc {

enum class SamplerKind {
  spherical_eig,
  spherical_dpp,
  iid_uniform,
  equal_area_jitter,
  fibonacci,
};

std::string to_string(SamplerKind k);
SamplerKind sampler_kind_from_string(const std::string& name);

struct SamplerSpec {
  SamplerKind kind = SamplerKind::iid_uniform;
  std::size_t n = 1;
  std::uint64_t seed = 0;
  std::uint64_t stream_id = 0;
};

// Dispatch on kind; fibonacci is deterministic and ignores the rng fields.
Configuration sample(const SamplerSpec& spec);

// Spherical ensemble via the random matrix model: eigenvalues of B^{-1}A for
// Gaussian A, B, mapped through inverse stereographic projection (no
// rescaling of the spectrum; the image's first intensity is uniform).
Configuration sample_spherical_eig(std::size_t n, RngStream& rng,
                                   double part_stddev = 0.70710678118654752440);

// Same law through sequential conditional sampling of the planar projection
// kernel with orthonormal functions ~ z^k (1+|z|^2)^{-(N+1)/2}.
Configuration sample_spherical_dpp(std::size_t n, RngStream& rng);

Configuration sample_iid_uniform(std::size_t n, RngStream& rng);

// One uniform point in each cell of a zonal equal-area partition (polar caps
// plus latitude collars subdivided in azimuth; every cell has area 4 pi / n
// exactly).
Configuration sample_equal_area_jitter(std::size_t n, RngStream& rng);

// Deterministic Fibonacci spiral: golden-angle azimuths, equal-area
// latitudes.
Configuration sample_fibonacci(std::size_t n);

// Cells of the zonal partition, exposed for construction checks.
struct EqualAreaCell {
  double z_lo, z_hi, phi_lo, phi_hi;
  double area() const { return (z_hi - z_lo) * (phi_hi - phi_lo); }
};
std::vector<EqualAreaCell> equal_area_partition(std::size_t n);

}  // namespace sphqmc
