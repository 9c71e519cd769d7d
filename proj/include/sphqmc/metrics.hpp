#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include "sphqmc/geometry.hpp"
#include "sphqmc/rng.hpp"

namespace sphqmc {

// Sobolev smoothness parameter; the worst-case error is finite only for
// s > 1 on a two-dimensional manifold.
struct SmoothnessParam {
  double s;
  explicit SmoothnessParam(double s_in) : s(s_in) {
    if (!(s > 1.0)) {
      throw std::invalid_argument("SmoothnessParam: requires s > 1");
    }
  }
};

enum class WceRoute { legendre, heat_kernel, distance_s32 };
std::string to_string(WceRoute r);

// wce value together with its truncation level and a certified absolute
// bound on the wce^2 truncation error: value^2 +- tail_bound brackets the
// exact wce^2.
struct WceResult {
  double value = 0.0;
  double s = 0.0;
  long truncation_l = 0;
  double tail_bound = 0.0;
  WceRoute route = WceRoute::legendre;

  double squared() const { return value * value; }
};

struct WceOptions {
  double tol = 1e-8;          // absolute tolerance on wce^2
  long l_cap = 4'000'000;     // refuse truncation levels beyond this
  bool bernstein_tail = false;  // per-pair |P_l(cos t)| <= sqrt(2/(pi l sin t))
  unsigned threads = 0;       // 0 = hardware
};

// Spectral route:
//   wce^2 = 1/(4 pi N^2) sum_{i,j} sum_{l=1}^{L} (2l+1) P_l(<x_i,x_j>)
//           / (l(l+1))^s
// with L chosen so the certified tail (exact telescoping 1/(L+1)^2 at s = 2,
// integral bound 2 L^(2-2s)/(2s-2) otherwise, divided by 4 pi) is <= tol.
// With bernstein_tail the off-diagonal tails use the sharper pointwise bound
// and the diagonal tail is replaced by its integral-sandwich midpoint, which
// reaches small tolerances for s < 2 at practical L.
WceResult wce_legendre(const Configuration& c, SmoothnessParam s,
                       const WceOptions& opts = {});

struct HeatQuadOptions {
  double tol = 1e-8;     // absolute target on wce^2
  unsigned threads = 0;
  int max_simpson_nodes = 16385;
};

// Independent route through the heat kernel:
//   wce^2 = (1/Gamma(s)) Int_0^inf t^(s-1) g(t) dt
// evaluated by quadrature of the off-diagonal pair sum on a log grid (the
// diagonal part integrates to Z(s)/(4 pi N) exactly), with documented small-t
// and large-t tail handling folded into tail_bound.
WceResult wce_heat_kernel(const Configuration& c, SmoothnessParam s,
                          const HeatQuadOptions& opts = {});

// g(t) = 1/(4 pi N^2) sum_{i,j} sum_{l>=1} (2l+1) e^(-t l(l+1))
//        P_l(<x_i,x_j>), truncated with a certified geometric tail.
struct HeatKernelEval {
  double t = 0.0;
  double value = 0.0;
  long truncation_l = 0;
  double tail_bound = 0.0;
};
HeatKernelEval g_of_t(const Configuration& c, double t, double tol = 1e-12);

// s = 3/2 worst-case error through the chordal distance functional
// 4/3 - (1/N^2) sum_{i,j} |x_i - x_j|, scaled by a calibration constant
// kappa fixed once against the Legendre route at N = 1.  The two routes are
// comparable (not equal) for general configurations.
struct DistanceWceResult {
  WceResult result;
  double functional = 0.0;  // 4/3 - mean chordal distance
  double kappa = 0.0;
};
DistanceWceResult wce_distance_s32(const Configuration& c);
// kappa = wce_legendre(single point; 3/2)^2 / (4/3).
double stolarsky_kappa();

// Generalized distance sum over ordered pairs i != j of |x_i-x_j|^(2s-2),
// 1 < s < 2.
double generalized_sum(const Configuration& c, SmoothnessParam s);

// Coulomb energy E^(N) = -sum_{i != j} (1/2) log |x_i - x_j|; +infinity when
// two points coincide.
double log_energy(const Configuration& c);

// --- spherical cap discrepancies (see caps.cpp) -----------------------------

struct CapL2Result {
  double estimate = 0.0;   // estimate of Int (sigma(C) - emp(C))^2 dC
  double std_error = 0.0;
  std::size_t samples = 0;
};

// Monte-Carlo estimate under the uniform cap measure (center uniform on the
// sphere, height uniform on [-1,1]).
CapL2Result cap_discrepancy_l2(const Configuration& c, std::size_t mc_caps,
                               RngStream& rng);

// Exact value of (1/8)(4/3 - mean chordal distance); equals the cap measure
// integral above by the invariance identity.  Used as the L2 oracle.
double cap_discrepancy_l2_exact(const Configuration& c);

enum class CapLinfMode { exact_small_n, randomized };

// L-infinity cap discrepancy sup_C |sigma(C) - emp(C)|.  Exact mode
// enumerates extremal caps through point triples/pairs/singles (N <= 300);
// randomized mode is a multi-start local search whose result is a lower
// bound on the sup.
double cap_discrepancy_linf(const Configuration& c, CapLinfMode mode,
                            RngStream* rng = nullptr,
                            unsigned threads = 0);

}  // namespace sphqmc
