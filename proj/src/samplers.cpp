#include "sphqmc/samplers.hpp"

#include <cmath>
#include <complex>
#include <limits>
#include <stdexcept>

#include "sphqmc/linalg.hpp"
#include "sphqmc/spectral.hpp"

namespace sphqmc {

std::string to_string(SamplerKind k) {
  switch (k) {
    case SamplerKind::spherical_eig: return "spherical-eig";
    case SamplerKind::spherical_dpp: return "spherical-dpp";
    case SamplerKind::iid_uniform: return "iid-uniform";
    case SamplerKind::equal_area_jitter: return "equal-area-jitter";
    case SamplerKind::fibonacci: return "fibonacci";
  }
  return "?";
}

SamplerKind sampler_kind_from_string(const std::string& name) {
  if (name == "spherical-eig") return SamplerKind::spherical_eig;
  if (name == "spherical-dpp") return SamplerKind::spherical_dpp;
  if (name == "iid-uniform") return SamplerKind::iid_uniform;
  if (name == "equal-area-jitter") return SamplerKind::equal_area_jitter;
  if (name == "fibonacci") return SamplerKind::fibonacci;
  throw std::invalid_argument("unknown sampler kind: " + name);
}

Configuration sample(const SamplerSpec& spec) {
  if (spec.n < 1) throw std::invalid_argument("sample: n must be >= 1");
  RngStream rng(spec.seed, spec.stream_id);
  switch (spec.kind) {
    case SamplerKind::spherical_eig: return sample_spherical_eig(spec.n, rng);
    case SamplerKind::spherical_dpp: return sample_spherical_dpp(spec.n, rng);
    case SamplerKind::iid_uniform: return sample_iid_uniform(spec.n, rng);
    case SamplerKind::equal_area_jitter:
      return sample_equal_area_jitter(spec.n, rng);
    case SamplerKind::fibonacci: return sample_fibonacci(spec.n);
  }
  throw std::logic_error("sample: unhandled kind");
}

Configuration sample_spherical_eig(std::size_t n, RngStream& rng,
                                   double part_stddev) {
  if (n < 1) throw std::invalid_argument("sample_spherical_eig: n >= 1");
  const ComplexMatrix a = gaussian_matrix(n, rng, part_stddev);
  constexpr int kMaxRetries = 8;
  for (int attempt = 0;; ++attempt) {
    const ComplexMatrix b = gaussian_matrix(n, rng, part_stddev);
    try {
      const ComplexMatrix quotient = solve(b, a);
      const std::vector<Complex> eig = eigenvalues(quotient);
      std::vector<UnitPoint> pts;
      pts.reserve(n);
      for (const Complex& z : eig) {
        pts.push_back(inverse_stereographic({z.real(), z.imag()}));
      }
      return Configuration(std::move(pts));
    } catch (const singular_matrix_error&) {
      if (attempt + 1 >= kMaxRetries) throw;
    }
  }
}

namespace {

// Values of the N orthonormal planar kernel functions
//   phi_k(z) = z^k (1+|z|^2)^{-(N+1)/2} / sqrt(pi B(k+1, N-k))
// at z.  Magnitudes are assembled in log space; underflow flushes to zero.
void eval_kernel_functions(std::size_t n, const std::complex<double>& z,
                           std::vector<std::complex<double>>& out) {
  out.assign(n, {0.0, 0.0});
  const double a = std::norm(z);
  if (!std::isfinite(a)) return;
  const double log1pa = std::log1p(a);
  const double abs_z = std::abs(z);
  const double log_abs = (abs_z > 0.0) ? std::log(abs_z) : 0.0;
  const std::complex<double> phase_step =
      (abs_z > 0.0) ? z / abs_z : std::complex<double>(1.0, 0.0);
  const double lg_n1 = real_log_gamma(static_cast<double>(n) + 1.0);
  std::complex<double> phase(1.0, 0.0);
  for (std::size_t k = 0; k < n; ++k) {
    const double log_beta = real_log_gamma(k + 1.0) +
                            real_log_gamma(static_cast<double>(n - k)) -
                            lg_n1;
    const double log_mag = (k > 0 && abs_z == 0.0
                                ? -std::numeric_limits<double>::infinity()
                                : k * log_abs) -
                           0.5 * (n + 1.0) * log1pa -
                           0.5 * (std::log(M_PI) + log_beta);
    const double mag = std::exp(log_mag);
    if (mag > 0.0) out[k] = mag * phase;
    phase *= phase_step;
  }
}

}  // namespace

Configuration sample_spherical_dpp(std::size_t n, RngStream& rng) {
  if (n < 1) throw std::invalid_argument("sample_spherical_dpp: n >= 1");
  const std::size_t attempts_cap = 2000 + 200 * n;

  // Columns step.. of basis hold the orthonormal functions of the current
  // conditional kernel, expressed in the phi basis.
  std::vector<std::complex<double>> basis(n * n, {0.0, 0.0});
  for (std::size_t k = 0; k < n; ++k) basis[k * n + k] = {1.0, 0.0};

  std::vector<std::complex<double>> phi(n), val(n), w(n);
  std::vector<UnitPoint> pts;
  pts.reserve(n);

  for (std::size_t step = 0; step < n; ++step) {
    std::complex<double> accepted_z;
    bool accepted = false;
    for (std::size_t attempt = 0; attempt < attempts_cap; ++attempt) {
      // proposal: uniform on the sphere == K(z,z)/N in the plane
      const double zc = rng.uniform(-1.0, 1.0);
      const double ph = rng.uniform(0.0, 2.0 * M_PI);
      const double rr = std::sqrt(std::max(0.0, 1.0 - zc * zc));
      const UnitPoint p(rr * std::cos(ph), rr * std::sin(ph), zc);
      const auto planar = stereographic(p);
      if (!planar) continue;
      const std::complex<double> z(planar->re, planar->im);
      eval_kernel_functions(n, z, phi);
      double kzz = 0.0;
      for (std::size_t k = 0; k < n; ++k) kzz += std::norm(phi[k]);
      if (kzz <= 0.0) continue;
      double num = 0.0;
      for (std::size_t j = step; j < n; ++j) {
        std::complex<double> v(0.0, 0.0);
        for (std::size_t k = 0; k < n; ++k) v += basis[k * n + j] * phi[k];
        val[j] = v;
        num += std::norm(v);
      }
      if (rng.uniform() * kzz <= num) {
        accepted_z = z;
        accepted = true;
        break;
      }
    }
    if (!accepted) {
      throw std::runtime_error(
          "sample_spherical_dpp: rejection sampling stalled at step " +
          std::to_string(step) + " of " + std::to_string(n));
    }

    pts.push_back(inverse_stereographic({accepted_z.real(), accepted_z.imag()}));
    if (step + 1 == n) break;

    // Rotate the active columns so the matched function sits in column
    // `step`, then drop it (Householder on the value vector).
    double norm2 = 0.0;
    for (std::size_t j = step; j < n; ++j) norm2 += std::norm(val[j]);
    const double vnorm = std::sqrt(norm2);
    const std::complex<double> v0 = val[step];
    const double av0 = std::abs(v0);
    const std::complex<double> sign =
        (av0 > 0.0) ? v0 / av0 : std::complex<double>(1.0, 0.0);
    val[step] += sign * vnorm;  // v = val - rho e1 with rho = -sign |val|
    const double vv = 2.0 * (norm2 + vnorm * av0);
    if (vv > 0.0) {
      const double tau = 2.0 / vv;
      for (std::size_t k = 0; k < n; ++k) {
        std::complex<double> wk(0.0, 0.0);
        for (std::size_t j = step; j < n; ++j) {
          wk += basis[k * n + j] * std::conj(val[j]);
        }
        wk *= tau;
        for (std::size_t j = step; j < n; ++j) {
          basis[k * n + j] -= wk * val[j];
        }
      }
    }
  }
  return Configuration(std::move(pts));
}

Configuration sample_iid_uniform(std::size_t n, RngStream& rng) {
  if (n < 1) throw std::invalid_argument("sample_iid_uniform: n >= 1");
  std::vector<UnitPoint> pts;
  pts.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double z = rng.uniform(-1.0, 1.0);
    const double ph = rng.uniform(0.0, 2.0 * M_PI);
    const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
    pts.emplace_back(r * std::cos(ph), r * std::sin(ph), z);
  }
  return Configuration(std::move(pts));
}

std::vector<EqualAreaCell> equal_area_partition(std::size_t n) {
  if (n < 1) throw std::invalid_argument("equal_area_partition: n >= 1");
  const double two_pi = 2.0 * M_PI;
  std::vector<EqualAreaCell> cells;
  cells.reserve(n);
  if (n == 1) {
    cells.push_back({-1.0, 1.0, 0.0, two_pi});
    return cells;
  }
  if (n == 2) {
    cells.push_back({0.0, 1.0, 0.0, two_pi});
    cells.push_back({-1.0, 0.0, 0.0, two_pi});
    return cells;
  }
  // polar caps of one cell each; z boundaries from cumulative cell counts so
  // every cell area is exactly 4 pi / n
  const double z_cap = 1.0 - 2.0 / static_cast<double>(n);
  cells.push_back({z_cap, 1.0, 0.0, two_pi});
  const std::size_t middle = n - 2;
  const double theta_top = std::acos(z_cap);
  const double theta_bot = M_PI - theta_top;
  const double ideal = std::sqrt(4.0 * M_PI / static_cast<double>(n));
  const std::size_t n_collars = std::max<std::size_t>(
      1, static_cast<std::size_t>(std::lround((theta_bot - theta_top) / ideal)));

  // distribute the middle cells over collars by ideal area with running
  // remainder rounding
  std::vector<std::size_t> counts(n_collars, 0);
  {
    const double dtheta = (theta_bot - theta_top) / n_collars;
    double rem = 0.0;
    std::size_t assigned = 0;
    for (std::size_t i = 0; i < n_collars; ++i) {
      const double z_hi = std::cos(theta_top + i * dtheta);
      const double z_lo = std::cos(theta_top + (i + 1) * dtheta);
      const double frac = middle * (z_hi - z_lo) / (2.0 * z_cap);
      double want = frac + rem;
      std::size_t m = static_cast<std::size_t>(
          std::max(0L, std::lround(want)));
      if (i + 1 == n_collars) m = middle - assigned;
      m = std::min(m, middle - assigned);
      if (m == 0 && assigned < middle) m = 1;
      rem = want - static_cast<double>(m);
      counts[i] = m;
      assigned += m;
    }
  }

  std::size_t cum = 1;
  for (std::size_t i = 0; i < n_collars; ++i) {
    if (counts[i] == 0) continue;
    const double z_hi = 1.0 - 2.0 * static_cast<double>(cum) / n;
    cum += counts[i];
    const double z_lo = 1.0 - 2.0 * static_cast<double>(cum) / n;
    const double dphi = two_pi / static_cast<double>(counts[i]);
    for (std::size_t j = 0; j < counts[i]; ++j) {
      cells.push_back({z_lo, z_hi, j * dphi, (j + 1) * dphi});
    }
  }
  cells.push_back({-1.0, 1.0 - 2.0 * static_cast<double>(cum) / n, 0.0, two_pi});
  return cells;
}

Configuration sample_equal_area_jitter(std::size_t n, RngStream& rng) {
  const auto cells = equal_area_partition(n);
  std::vector<UnitPoint> pts;
  pts.reserve(n);
  for (const auto& cell : cells) {
    const double z = rng.uniform(cell.z_lo, cell.z_hi);
    const double ph = rng.uniform(cell.phi_lo, cell.phi_hi);
    const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
    pts.emplace_back(r * std::cos(ph), r * std::sin(ph), z);
  }
  return Configuration(std::move(pts));
}

Configuration sample_fibonacci(std::size_t n) {
  if (n < 1) throw std::invalid_argument("sample_fibonacci: n >= 1");
  const double golden_angle = M_PI * (3.0 - std::sqrt(5.0));
  std::vector<UnitPoint> pts;
  pts.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double z = 1.0 - (2.0 * i + 1.0) / static_cast<double>(n);
    const double ph = golden_angle * static_cast<double>(i);
    const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
    pts.emplace_back(r * std::cos(ph), r * std::sin(ph), z);
  }
  return Configuration(std::move(pts));
}

}  // namespace sphqmc
