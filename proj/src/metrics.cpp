#include "sphqmc/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>

#include "sphqmc/parallel.hpp"
#include "sphqmc/spectral.hpp"

namespace sphqmc {

namespace {

constexpr std::size_t kPairBlock = 8192;

// Recurrence coefficients P_l = a_l x P_{l-1} - b_l P_{l-2} precomputed per
// chunk of l so the pair-lane loop carries no divisions.
struct RecurrenceChunk {
  static constexpr long kChunk = 4096;
  double a[kChunk];
  double b[kChunk];
};

// sum over the given cosines of sum_{l=1}^{L} w[l] P_l(x), three-term
// recurrence run over a tile of pairs at a time so the inner loop vectorizes.
double legendre_block_sum(const double* x, std::size_t m, const double* w,
                          long big_l) {
  constexpr std::size_t T = 16;
  RecurrenceChunk rc;
  double total = 0.0;
  std::size_t p = 0;
  alignas(64) double xs[T], pm1[T], pc[T], acc[T];
  for (; p + T <= m; p += T) {
    for (std::size_t t = 0; t < T; ++t) {
      xs[t] = x[p + t];
      pm1[t] = 1.0;
      pc[t] = xs[t];
      acc[t] = w[1] * xs[t];
    }
    for (long l0 = 2; l0 <= big_l; l0 += RecurrenceChunk::kChunk) {
      const long l1 = std::min(big_l, l0 + RecurrenceChunk::kChunk - 1);
      for (long l = l0; l <= l1; ++l) {
        const double inv = 1.0 / static_cast<double>(l);
        rc.a[l - l0] = (2.0 * l - 1.0) * inv;
        rc.b[l - l0] = (l - 1.0) * inv;
      }
      for (long l = l0; l <= l1; ++l) {
        const double c1 = rc.a[l - l0];
        const double c2 = rc.b[l - l0];
        const double wl = w[l];
        for (std::size_t t = 0; t < T; ++t) {
          const double pn = c1 * xs[t] * pc[t] - c2 * pm1[t];
          acc[t] += wl * pn;
          pm1[t] = pc[t];
          pc[t] = pn;
        }
      }
    }
    for (std::size_t t = 0; t < T; ++t) total += acc[t];
  }
  for (; p < m; ++p) {
    double prev = 1.0, cur = x[p], a = w[1] * cur;
    for (long l = 2; l <= big_l; ++l) {
      const double pn = ((2.0 * l - 1.0) * x[p] * cur - (l - 1.0) * prev) / l;
      a += w[l] * pn;
      prev = cur;
      cur = pn;
    }
    total += a;
  }
  return total;
}

// Deterministic block-parallel pair sum: fixed block decomposition, partial
// sums reduced in block order regardless of thread count.
double pair_sum_parallel(const std::vector<double>& cosines, const double* w,
                         long big_l, unsigned threads) {
  const std::size_t m = cosines.size();
  if (m == 0) return 0.0;
  const std::size_t n_blocks = (m + kPairBlock - 1) / kPairBlock;
  std::vector<double> partial(n_blocks, 0.0);
  parallel_jobs(n_blocks, threads, [&](std::size_t b) {
    const std::size_t lo = b * kPairBlock;
    const std::size_t hi = std::min(m, lo + kPairBlock);
    partial[b] = legendre_block_sum(cosines.data() + lo, hi - lo, w, big_l);
  });
  double s = 0.0;
  for (double v : partial) s += v;
  return s;
}

// Certified upper bound on sum_{l>L} (2l+1)/(l(l+1))^s with |P_l| <= 1:
// exact telescoping at s = 2, integral bound otherwise.
double worst_tail(long big_l, double s) {
  if (s == 2.0) return 1.0 / ((big_l + 1.0) * (big_l + 1.0));
  return 2.0 * std::pow(static_cast<double>(big_l), 2.0 - 2.0 * s) /
         (2.0 * s - 2.0);
}

long worst_tail_level(double s, double budget) {
  // smallest L with worst_tail(L, s) <= budget
  if (s == 2.0) {
    return static_cast<long>(std::ceil(std::sqrt(1.0 / budget)));
  }
  const double expo = 1.0 / (2.0 * s - 2.0);
  return static_cast<long>(
      std::ceil(std::pow(2.0 / ((2.0 * s - 2.0) * budget), expo)));
}

// Bernstein-type pair tail: (2l+1)/(l(l+1))^s |P_l(cos t)| summed over l > L
// is at most sqrt(2/(pi sin t)) * 2 L^(3/2-2s) / (2s - 3/2).
double bernstein_tail(long big_l, double s, double sin_theta) {
  return std::sqrt(2.0 / (M_PI * sin_theta)) * 2.0 *
         std::pow(static_cast<double>(big_l), 1.5 - 2.0 * s) /
         (2.0 * s - 1.5);
}

std::string format_sci(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.3e", v);
  return buf;
}

std::vector<double> legendre_weights(long big_l, double s) {
  std::vector<double> w(static_cast<std::size_t>(big_l) + 1, 0.0);
  for (long l = 1; l <= big_l; ++l) {
    w[l] = sphere_multiplicity(l) * std::pow(sphere_eigenvalue(l), -s);
  }
  return w;
}

}  // namespace

std::string to_string(WceRoute r) {
  switch (r) {
    case WceRoute::legendre: return "legendre";
    case WceRoute::heat_kernel: return "heat-kernel";
    case WceRoute::distance_s32: return "distance-s32";
  }
  return "?";
}

WceResult wce_legendre(const Configuration& c, SmoothnessParam sp,
                       const WceOptions& opts) {
  if (!(opts.tol > 0.0)) {
    throw std::invalid_argument("wce_legendre: tol must be positive");
  }
  const double s = sp.s;
  const std::size_t n = c.n();
  const double n_d = static_cast<double>(n);
  const std::vector<double> cosines = pairwise_cosines_upper(c);

  long big_l = 0;
  double tail_bound = 0.0;
  double diag_tail_mid = 0.0;
  std::vector<double> pair_tail_budget;  // bernstein mode only

  if (!opts.bernstein_tail) {
    const long l_tol = worst_tail_level(s, kFourPi * opts.tol);
    if (l_tol > opts.l_cap) {
      throw std::runtime_error(
          "wce_legendre: tolerance needs L = " + std::to_string(l_tol) +
          " > cap " + std::to_string(opts.l_cap) + "; achievable tol ~" +
          format_sci(worst_tail(opts.l_cap, s) / kFourPi) +
          " (consider bernstein_tail)");
    }
    big_l = std::min<long>(std::max<long>(10 * static_cast<long>(n), l_tol),
                           opts.l_cap);
    tail_bound = worst_tail(big_l, s) / kFourPi;
  } else {
    // Pick the smallest L whose combined certified tail meets tol.  The
    // diagonal tail is replaced by its integral-sandwich midpoint whose
    // half-width enters the bound instead.
    std::vector<double> sin_theta(cosines.size());
    for (std::size_t i = 0; i < cosines.size(); ++i) {
      sin_theta[i] = std::sqrt(std::max(0.0, 1.0 - cosines[i] * cosines[i]));
    }
    const auto combined_tail = [&](long bl) {
      double diag_half;
      if (s == 2.0) {
        diag_half = 0.0;
      } else {
        const double up = zeta_tail_upper(bl, s);
        const double lo =
            std::pow((bl + 1.0) * (bl + 2.0), 1.0 - s) / (s - 1.0);
        diag_half = 0.5 * (up - lo);
      }
      double off = 0.0;
      const double worst = worst_tail(bl, s);
      for (double st : sin_theta) {
        off += (st > 1e-9) ? std::min(worst, bernstein_tail(bl, s, st))
                           : worst;
      }
      return (n_d * diag_half + 2.0 * off) / (kFourPi * n_d * n_d);
    };
    big_l = 256;
    while (combined_tail(big_l) > opts.tol && big_l < opts.l_cap) {
      big_l = std::min<long>(2 * big_l, opts.l_cap);
    }
    tail_bound = combined_tail(big_l);
    if (tail_bound > opts.tol) {
      throw std::runtime_error(
          "wce_legendre: tolerance unreachable at L cap " +
          std::to_string(opts.l_cap) + "; achievable tol ~" +
          format_sci(tail_bound));
    }
    if (s == 2.0) {
      diag_tail_mid = 1.0 / ((big_l + 1.0) * (big_l + 1.0));
    } else {
      const double up = zeta_tail_upper(big_l, s);
      const double lo =
          std::pow((big_l + 1.0) * (big_l + 2.0), 1.0 - s) / (s - 1.0);
      diag_tail_mid = 0.5 * (up + lo);
    }
  }

  const std::vector<double> w = legendre_weights(big_l, s);
  double diag_partial = 0.0;
  for (long l = 1; l <= big_l; ++l) diag_partial += w[l];
  const double off = pair_sum_parallel(cosines, w.data(), big_l, opts.threads);
  const double wce2 = (n_d * (diag_partial + diag_tail_mid) + 2.0 * off) /
                      (kFourPi * n_d * n_d);

  WceResult r;
  r.value = std::sqrt(std::max(0.0, wce2));
  r.s = s;
  r.truncation_l = big_l;
  r.tail_bound = tail_bound;
  r.route = WceRoute::legendre;
  return r;
}

namespace {

// Certified bound on sum_{l>L} (2l+1) e^{-t l(l+1)} (term ratio is below
// (2L+3)/(2L+1) e^{-2t(L+1)}).
double heat_tail(double t, long big_l) {
  const double first = (2.0 * big_l + 3.0) *
                       std::exp(-t * (big_l + 1.0) * (big_l + 2.0));
  const double ratio = (2.0 * big_l + 5.0) / (2.0 * big_l + 3.0) *
                       std::exp(-2.0 * t * (big_l + 2.0));
  if (ratio >= 1.0) return std::numeric_limits<double>::infinity();
  return first / (1.0 - ratio);
}

long heat_level(double t, double tail_budget) {
  long lo = 1, hi = 64;
  while (heat_tail(t, hi) > tail_budget) {
    hi *= 2;
    if (hi > (1L << 40)) {
      throw std::runtime_error("heat series: level overflow");
    }
  }
  while (lo < hi) {
    const long mid = lo + (hi - lo) / 2;
    if (heat_tail(t, mid) <= tail_budget) {
      hi = mid;
    } else {
      lo = mid + 1;
    }
  }
  return lo;
}

// Weights (2l+1) e^{-t l(l+1)} for l = 1..L, built with one exp call.
std::vector<double> heat_weights(double t, long big_l) {
  std::vector<double> w(static_cast<std::size_t>(big_l) + 1, 0.0);
  const double q = std::exp(-2.0 * t);
  double f = std::exp(-2.0 * t);  // e^{-t l(l+1)} at l = 1
  double g = q * q;               // e^{-2 t (l+1)} at l = 1
  for (long l = 1; l <= big_l; ++l) {
    w[l] = (2.0 * l + 1.0) * f;
    f *= g;
    g *= q;
  }
  return w;
}

// 1D trace sum Theta~(t) = sum_{l>=1} (2l+1) e^{-t l(l+1)}, certified.
double theta_sum(double t, double tail_budget, long* level_out) {
  const long big_l = heat_level(t, tail_budget);
  const std::vector<double> w = heat_weights(t, big_l);
  double s = 0.0;
  for (long l = big_l; l >= 1; --l) s += w[l];
  if (level_out) *level_out = big_l;
  return s;
}

// Off-diagonal pair sum sum_{i<j} sum_l (2l+1) e^{-t l(l+1)} P_l(cos_ij).
double heat_pair_sum(const std::vector<double>& cosines, double t,
                     double tail_budget, long* level_out, unsigned threads) {
  if (cosines.empty()) {
    if (level_out) *level_out = 0;
    return 0.0;
  }
  const long big_l = heat_level(t, tail_budget);
  const std::vector<double> w = heat_weights(t, big_l);
  if (level_out) *level_out = big_l;
  return pair_sum_parallel(cosines, w.data(), big_l, threads);
}

}  // namespace

HeatKernelEval g_of_t(const Configuration& c, double t, double tol) {
  if (!(t > 0.0)) throw std::invalid_argument("g_of_t: t must be positive");
  if (!(tol > 0.0)) throw std::invalid_argument("g_of_t: tol must be positive");
  const std::size_t n = c.n();
  const double n_d = static_cast<double>(n);
  const std::vector<double> cosines = pairwise_cosines_upper(c);
  // Split the absolute budget between truncation on the diagonal and the
  // off-diagonal pairs; both use the same certified geometric tail.
  const double per_term_budget = tol * kFourPi * n_d / 2.0;
  long l_diag = 0, l_off = 0;
  const double diag = theta_sum(t, per_term_budget, &l_diag);
  const double off =
      cosines.empty()
          ? 0.0
          : heat_pair_sum(cosines, t,
                          per_term_budget * n_d / (2.0 * cosines.size()),
                          &l_off, 0);
  HeatKernelEval out;
  out.t = t;
  out.value = (n_d * diag + 2.0 * off) / (kFourPi * n_d * n_d);
  out.truncation_l = std::max(l_diag, l_off);
  out.tail_bound = tol;
  return out;
}

WceResult wce_heat_kernel(const Configuration& c, SmoothnessParam sp,
                          const HeatQuadOptions& opts) {
  const double s = sp.s;
  const std::size_t n = c.n();
  const double n_d = static_cast<double>(n);
  const double gamma_s = real_gamma(s);

  // Coincident pairs contribute exactly like diagonal terms; fold them into
  // the analytic part so the quadrature only sees strictly separated pairs.
  std::vector<double> cosines;
  std::size_t coincident = 0;
  double min_angle = M_PI;
  for (double x : pairwise_cosines_upper(c)) {
    if (x >= 1.0 - 1e-15) {
      ++coincident;
      continue;
    }
    cosines.push_back(x);
    min_angle = std::min(min_angle, std::acos(std::clamp(x, -1.0, 1.0)));
  }

  const ZetaResult z = zeta(s, std::min(1e-13, 0.001 * opts.tol));
  const double diag_factor = (n_d + 2.0 * coincident) / (kFourPi * n_d * n_d);
  const double diag_part = z.value * diag_factor;
  double tail_bound = z.error * diag_factor;

  WceResult r;
  r.s = s;
  r.route = WceRoute::heat_kernel;

  if (cosines.empty()) {
    r.value = std::sqrt(std::max(0.0, diag_part));
    r.truncation_l = z.truncation_l;
    r.tail_bound = tail_bound + 1e-16;
    return r;
  }

  const double m_pairs = static_cast<double>(cosines.size());
  const double off_scale = 2.0 / (kFourPi * n_d * n_d);

  // Large-t cutoff: per-pair magnitude of the spectral sum is below
  // B(x) = 2x/(1-x)^2 + x/(1-x) with x = e^{-2t}, and B(x)/x is increasing.
  double t_hi = std::max(4.0, s);
  const auto hi_rem = [&](double T) {
    const double x = std::exp(-2.0 * T);
    const double b_over_x = 2.0 / ((1.0 - x) * (1.0 - x)) + 1.0 / (1.0 - x);
    // int_T^inf t^{s-1} e^{-2t} dt <= T^{s-1} e^{-2T} for T >= s - 1
    return off_scale * m_pairs * b_over_x * std::pow(T, s - 1.0) *
           std::exp(-2.0 * T) / gamma_s;
  };
  while (hi_rem(t_hi) > 0.02 * opts.tol) t_hi += 2.0;
  tail_bound += hi_rem(t_hi);

  // Small-t cutoff: for t well below the squared minimum angle the kernel
  // terms are exponentially dead and the pair sum sits at its limit -1 per
  // pair; bound the integrand there by a probed envelope.
  const double node_budget_scale = 1e-13;
  const auto g_off = [&](double t) {
    return off_scale * heat_pair_sum(cosines, t,
                                     node_budget_scale * (1.0 + 1.0 / t),
                                     nullptr, opts.threads);
  };
  double t_lo = std::min(1e-4, min_angle * min_angle / 64.0);
  for (;;) {
    double probe_max = off_scale * m_pairs;  // the -1 per-pair limit
    for (double f : {1.0, 0.25, 0.0625}) {
      probe_max = std::max(probe_max, 2.0 * std::abs(g_off(t_lo * f)));
    }
    const double small_rem =
        probe_max * std::pow(t_lo, s) / (s * gamma_s);
    if (small_rem <= 0.02 * opts.tol || t_lo <= 1e-14) {
      tail_bound += small_rem;
      break;
    }
    t_lo *= 0.25;
  }

  // Composite Simpson in u = log t, doubling until stable.
  const double u_lo = std::log(t_lo), u_hi = std::log(t_hi);
  const auto f_of_u = [&](double u) {
    const double t = std::exp(u);
    return std::pow(t, s) * g_off(t);
  };
  double prev = 0.0, integral = 0.0, quad_err = 0.0;
  int nodes = 513;
  bool have_prev = false;
  for (; nodes <= opts.max_simpson_nodes; nodes = 2 * (nodes - 1) + 1) {
    const double h = (u_hi - u_lo) / (nodes - 1);
    double acc = f_of_u(u_lo) + f_of_u(u_hi);
    for (int i = 1; i < nodes - 1; ++i) {
      acc += f_of_u(u_lo + i * h) * ((i % 2) ? 4.0 : 2.0);
    }
    integral = acc * h / 3.0;
    if (have_prev) {
      quad_err = std::abs(integral - prev);
      if (quad_err <= 0.2 * opts.tol * gamma_s) break;
    }
    prev = integral;
    have_prev = true;
  }
  tail_bound += quad_err / gamma_s;
  // truncation allowance on the per-node spectral sums
  tail_bound += node_budget_scale * off_scale * m_pairs *
                (std::pow(t_hi, s) / s + std::pow(t_hi, s - 1.0) / (s - 1.0)) /
                gamma_s;

  const double wce2 = diag_part + integral / gamma_s;
  r.value = std::sqrt(std::max(0.0, wce2));
  r.truncation_l = heat_level(t_lo, node_budget_scale * (1.0 + 1.0 / t_lo));
  r.tail_bound = tail_bound;
  return r;
}

double stolarsky_kappa() {
  // kappa (4/3) = wce(single point; 3/2)^2 = Z(3/2)/(4 pi)
  static const double kappa = [] {
    const ZetaResult z = zeta(1.5, 1e-13);
    return z.value / kFourPi * (3.0 / 4.0);
  }();
  return kappa;
}

DistanceWceResult wce_distance_s32(const Configuration& c) {
  const std::size_t n = c.n();
  const double n_d = static_cast<double>(n);
  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      sum += c.points[i].chordal_distance(c.points[j]);
    }
  }
  const double functional = 4.0 / 3.0 - 2.0 * sum / (n_d * n_d);
  DistanceWceResult out;
  out.functional = functional;
  out.kappa = stolarsky_kappa();
  out.result.value = std::sqrt(std::max(0.0, out.kappa * functional));
  out.result.s = 1.5;
  out.result.truncation_l = 0;
  out.result.tail_bound = 1e-13;
  out.result.route = WceRoute::distance_s32;
  return out;
}

double generalized_sum(const Configuration& c, SmoothnessParam sp) {
  if (!(sp.s < 2.0)) {
    throw std::invalid_argument("generalized_sum: requires 1 < s < 2");
  }
  const double expo = 2.0 * sp.s - 2.0;
  double sum = 0.0;
  for (std::size_t i = 0; i < c.n(); ++i) {
    for (std::size_t j = i + 1; j < c.n(); ++j) {
      sum += std::pow(c.points[i].chordal_distance(c.points[j]), expo);
    }
  }
  return 2.0 * sum;
}

double log_energy(const Configuration& c) {
  double sum = 0.0;
  for (std::size_t i = 0; i < c.n(); ++i) {
    for (std::size_t j = i + 1; j < c.n(); ++j) {
      const double d = c.points[i].chordal_distance(c.points[j]);
      if (d == 0.0) return std::numeric_limits<double>::infinity();
      sum += std::log(d);
    }
  }
  return -sum;
}

}  // namespace sphqmc
