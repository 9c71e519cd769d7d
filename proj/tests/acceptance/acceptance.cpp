// Acceptance suite: every criterion prints one PASS/WARN/FAIL line with its
// measured numbers pinned against the tolerances fixed below.  Exit code 0
// on PASS or WARN, 1 on FAIL.
#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdio>
#include <cstdarg>
#include <cstring>
#include <string>
#include <vector>

#include "sphqmc/experiments.hpp"
#include "sphqmc/linalg.hpp"
#include "sphqmc/metrics.hpp"
#include "sphqmc/parallel.hpp"
#include "sphqmc/samplers.hpp"
#include "sphqmc/spectral.hpp"

using namespace sphqmc;

namespace {

int check_count = 0;
int fail_count = 0;
int warn_count = 0;

void require(bool ok, const char* fmt, ...) {
  ++check_count;
  if (!ok) ++fail_count;
  std::printf("  [%s] ", ok ? "ok" : "FAIL");
  va_list args;
  va_start(args, fmt);
  std::vfprintf(stdout, fmt, args);
  va_end(args);
  std::printf("\n");
}

void warn_unless(bool ok, const char* fmt, ...) {
  ++check_count;
  if (!ok) ++warn_count;
  std::printf("  [%s] ", ok ? "ok" : "WARN");
  va_list args;
  va_start(args, fmt);
  std::vfprintf(stdout, fmt, args);
  va_end(args);
  std::printf("\n");
}

// ---- criterion 1: spectral fixed points ------------------------------------

void criterion_1(unsigned) {
  const ZetaResult z2 = zeta(2.0, 1e-13);
  require(std::abs(z2.value - 1.0) <= 1e-12, "|Z(2) - 1| = %.3e <= 1e-12",
          std::abs(z2.value - 1.0));
  for (double eps : {0.01, 0.02, 0.05, 0.1, 0.2, 0.5, 1.0}) {
    const ZetaResult z = zeta(1.0 + eps, 1e-7);
    require(z.value + z.error <= 1.0 / eps + 2.0,
            "Z(1+%.2f) = %.6f <= 1/eps + 2 = %.4f", eps, z.value,
            1.0 / eps + 2.0);
  }
}

// ---- criterion 2: comparison constant --------------------------------------

void criterion_2(unsigned) {
  const double e_half = std::exp(0.5);
  double worst = 0.0;
  for (int i = 1; i <= 100; ++i) {
    worst = std::max(worst, comparison_constant(2.0, 2.0 + 0.15 * i / 100.0));
  }
  require(worst <= e_half, "max c(2, 2+eps) over 100-point grid = %.6f <= "
          "e^{1/2} = %.6f", worst, e_half);
  const double c215 = comparison_constant(2.0, 2.15);
  // The printed constant 1.634 is below the value of the stated formula
  // c(2,s)^2 = Gamma(s) + 1 + s^s e^{-s}, which gives 1.63614 at s = 2.15;
  // the inequality c < e^{1/2} = 1.64872 does hold.  Asserted as printed.
  require(c215 <= 1.634, "c(2, 2.15) = %.6f <= 1.634 (printed constant; "
          "formula value exceeds it by %.2e while staying under e^{1/2})",
          c215, c215 - 1.634);
}

// ---- criterion 3: explicit confidence numbers ------------------------------

void criterion_3(unsigned) {
  const ConfidenceReport rep = explicit_confidence(1000, 3.0);
  require(rep.wce_bound < 3e-3, "wce_bound = %.6e < 3e-3", rep.wce_bound);
  require(rep.numerator < 2.86, "numerator e sqrt((1+eta)/8pi) sqrt(log N) = "
          "%.6f < 2.86", rep.numerator);
  require(rep.failure_prob < 1e-3, "failure_prob = %.6e < 1e-3",
          rep.failure_prob);
}

// ---- criterion 4: wce cross-oracle -----------------------------------------

void criterion_4(unsigned threads) {
  const double kRoot = 1.0 / std::sqrt(kFourPi);
  {
    const Configuration single({UnitPoint(0.0, 0.0, 1.0)});
    WceOptions lo;
    lo.tol = 1e-12;
    const double a = wce_legendre(single, SmoothnessParam(2.0), lo).value;
    HeatQuadOptions ho;
    ho.tol = 1e-10;
    const double b = wce_heat_kernel(single, SmoothnessParam(2.0), ho).value;
    require(std::abs(a - kRoot) <= 1e-7, "single point legendre %.9f vs "
            "(4pi)^(-1/2) %.9f", a, kRoot);
    require(std::abs(b - kRoot) <= 1e-6, "single point heat %.9f vs %.9f", b,
            kRoot);
  }
  const double svals[] = {1.3, 1.5, 2.0, 2.5};
  const std::size_t n_configs = 100;
  std::vector<double> worst_gap(n_configs, 0.0), worst_comb(n_configs, 0.0);
  std::vector<int> bad(n_configs, 0);
  parallel_jobs(n_configs, threads, [&](std::size_t rep) {
    RngStream rng(4001, rep);
    const Configuration c = sample_iid_uniform(4 << (rep % 4), rng);
    for (double s : svals) {
      WceOptions lo;
      lo.tol = 4e-7;
      lo.bernstein_tail = s < 2.0;
      lo.threads = 1;
      HeatQuadOptions ho;
      ho.tol = 4e-7;
      ho.threads = 1;
      const WceResult a = wce_legendre(c, SmoothnessParam(s), lo);
      const WceResult b = wce_heat_kernel(c, SmoothnessParam(s), ho);
      const double combined = a.tail_bound + b.tail_bound;
      const double gap = std::abs(a.squared() - b.squared());
      worst_comb[rep] = std::max(worst_comb[rep], combined);
      worst_gap[rep] = std::max(worst_gap[rep], gap);
      if (combined > 1e-6 || gap > combined) bad[rep] = 1;
    }
  });
  int n_bad = 0;
  double gmax = 0.0, cmax = 0.0;
  for (std::size_t i = 0; i < n_configs; ++i) {
    n_bad += bad[i];
    gmax = std::max(gmax, worst_gap[i]);
    cmax = std::max(cmax, worst_comb[i]);
  }
  require(n_bad == 0, "routes agree on %zu configs x {1.3,1.5,2,2.5}: worst "
          "|wce^2 gap| %.2e, worst combined certified tol %.2e (<= 1e-6)",
          n_configs, gmax, cmax);
}

// ---- criterion 5: iid calibration ------------------------------------------

void criterion_5(unsigned threads) {
  const std::size_t reps = 2000, n = 64;
  std::vector<double> w2(reps);
  parallel_jobs(reps, threads, [&](std::size_t r) {
    RngStream rng(5001, r);
    WceOptions o;
    o.tol = 1e-8;
    o.threads = 1;
    const double v =
        wce_legendre(sample_iid_uniform(n, rng), SmoothnessParam(2.0), o)
            .value;
    w2[r] = v * v;
  });
  double mean = 0.0;
  for (double v : w2) mean += v;
  mean /= reps;
  double ss = 0.0;
  for (double v : w2) ss += (v - mean) * (v - mean);
  const double se = std::sqrt(ss / (reps - 1.0) / reps);
  const double oracle = 1.0 / (kFourPi * n);
  require(std::abs(mean - oracle) <= 3.0 * se,
          "mean wce^2 = %.6e vs 1/(4 pi 64) = %.6e (|z| = %.2f <= 3)", mean,
          oracle, std::abs(mean - oracle) / se);
}

// ---- criterion 6: headline reproduction ------------------------------------

void criterion_6(unsigned threads) {
  const HeadlineReport rep = headline_check(1000, 3.0, 200, 6001, threads);
  require(rep.max_tail_bound <= 1e-8,
          "all wce^2 tail bounds <= 1e-8 (max %.2e)", rep.max_tail_bound);
  require(rep.median < 2.86e-3, "median wce = %.6e < 2.86e-3 (iid reference "
          "%.6e, ratio %.1fx)", rep.median, rep.iid_median_ref,
          rep.iid_median_ref / rep.median);
  if (rep.exceed_count >= 2) {
    require(false, "exceedances of 2.86e-3 in 200 replicas = %zu (>= 2)",
            rep.exceed_count);
  } else {
    warn_unless(rep.exceed_count == 0,
                "exceedances of 2.86e-3 in 200 replicas = %zu (soft: the "
                "per-replica guarantee is only P >= 0.999)",
                rep.exceed_count);
  }
  std::printf("  CDF deciles:");
  for (int d = 0; d <= 10; ++d) {
    const std::size_t idx =
        std::min(rep.sorted_values.size() - 1,
                 static_cast<std::size_t>(d * rep.sorted_values.size() / 10));
    std::printf(" %.3e", rep.sorted_values[idx]);
  }
  std::printf("\n");
}

// ---- criterion 7: rate fit --------------------------------------------------

void criterion_7(unsigned threads) {
  const std::vector<std::size_t> ns = {50, 100, 200, 400};
  const ScalingReport ens = scaling_study(SamplerKind::spherical_eig, ns, 100,
                                          2.0, 7001, threads, 1e-8);
  require(ens.slope >= -1.15 && ens.slope <= -0.85,
          "ensemble slope = %.4f in [-1.15, -0.85] (bootstrap 95%% [%.3f, "
          "%.3f])", ens.slope, ens.slope_lo, ens.slope_hi);
  const ScalingReport iid = scaling_study(SamplerKind::iid_uniform, ns, 100,
                                          2.0, 7002, threads, 1e-8);
  require(iid.slope >= -0.65 && iid.slope <= -0.35,
          "iid control slope = %.4f in [-0.65, -0.35] (bootstrap 95%% [%.3f, "
          "%.3f])", iid.slope, iid.slope_lo, iid.slope_hi);
}

// ---- criterion 8: monotonicity and rotation invariance ----------------------

void criterion_8(unsigned threads) {
  const std::size_t n_configs = 100;
  std::vector<int> mono_bad(n_configs, 0), rot_bad(n_configs, 0);
  std::vector<double> rot_gap(n_configs, 0.0);
  parallel_jobs(n_configs, threads, [&](std::size_t rep) {
    RngStream rng(8001, rep);
    const Configuration c = sample_iid_uniform(16, rng);
    double prev = 1e300, prev_tail = 0.0;
    for (double s : {1.3, 1.5, 2.0, 2.5}) {
      WceOptions o;
      o.tol = 5e-8;
      o.bernstein_tail = s < 2.0;
      o.threads = 1;
      const WceResult r = wce_legendre(c, SmoothnessParam(s), o);
      if (r.squared() > prev + prev_tail + r.tail_bound) mono_bad[rep] = 1;
      prev = r.squared();
      prev_tail = r.tail_bound;
    }
    const Rotation rot = Rotation::random(rng);
    WceOptions o;
    o.tol = 1e-9;
    o.threads = 1;
    const double a = wce_legendre(c, SmoothnessParam(2.0), o).value;
    const double b =
        wce_legendre(apply_rotation(c, rot), SmoothnessParam(2.0), o).value;
    rot_gap[rep] = std::abs(a - b);
    if (rot_gap[rep] > 1e-10) rot_bad[rep] = 1;
  });
  int mono = 0, rot = 0;
  double gap = 0.0;
  for (std::size_t i = 0; i < n_configs; ++i) {
    mono += mono_bad[i];
    rot += rot_bad[i];
    gap = std::max(gap, rot_gap[i]);
  }
  require(mono == 0, "wce nonincreasing in s (tolerance-aware) on %zu configs",
          n_configs);
  require(rot == 0, "rotation invariance to 1e-10 on %zu configs (worst gap "
          "%.2e)", n_configs, gap);
}

// ---- criterion 9: MGF bound -------------------------------------------------

void criterion_9(unsigned threads) {
  // 1e5 replicas (>= the 1e4 floor): at (N, c) = (8, 0.5) the provable margin
  // equals the width of a 99% interval at 1e4 replicas, so the larger sample
  // is needed for the comparison to be sharp rather than a coin flip.
  for (std::size_t n : {2UL, 8UL}) {
    const MgfReport rep = mgf_test(n, {0.5, 1.0, 2.0}, 100000, 9000 + n,
                                   threads);
    for (const auto& cell : rep.cells) {
      require(cell.pass,
              "N=%zu c=%.1f: UCL99 = %.6f <= e^{c^2/3} = %.6f (margin %.4f)",
              n, cell.c, cell.ucl99, cell.bound, cell.bound - cell.ucl99);
    }
  }
}

// ---- criterion 10: CLT variance ----------------------------------------------

void criterion_10(unsigned threads) {
  const CltReport rep =
      clt_variance_test(SamplerKind::spherical_eig, 64, 10000, 10001, threads);
  require(rep.projection_identity_residual <= 1e-10,
          "projection identity | Int |K|^2 - N/4pi | = %.2e <= 1e-10",
          rep.projection_identity_residual);
  require(std::abs(rep.z_score) <= 3.0,
          "sample Var(sum z) = %.5f vs kernel oracle %.5f (|z| = %.2f <= 3)",
          rep.sample_var, rep.oracle_var, std::abs(rep.z_score));
}

// ---- criterion 11: concentration domination ----------------------------------

void criterion_11(unsigned threads) {
  const std::size_t reps = 10000, n = 16;
  std::vector<double> w3(reps);
  parallel_jobs(reps, threads, [&](std::size_t r) {
    RngStream rng(11001, r);
    WceOptions o;
    o.tol = 1e-10;
    o.threads = 1;
    w3[r] = wce_legendre(sample_spherical_eig(n, rng), SmoothnessParam(3.0), o)
                .value;
  });
  for (double delta : {0.03, 0.035, 0.04, 0.045, 0.05, 0.06, 0.08, 0.10}) {
    const BoundParams p = BoundParams::from_delta(n, 1.0, delta);
    const double bound = concentration_tail(p);
    std::size_t exceed = 0;
    for (double v : w3) {
      if (v > delta) ++exceed;
    }
    const double frac = static_cast<double>(exceed) / reps;
    const double se = std::sqrt(std::max(frac * (1.0 - frac), 0.0) / reps);
    require(frac <= bound + 3.0 * se,
            "delta=%.3f: empirical tail %.4f <= bound %.4f + 3 SE", delta,
            frac, bound);
  }
}

// ---- criterion 12: eigensolver contract ---------------------------------------

ComplexMatrix acceptance_unitary(std::size_t n, RngStream& rng) {
  ComplexMatrix g = gaussian_matrix(n, rng);
  for (std::size_t j = 0; j < n; ++j) {
    for (std::size_t k = 0; k < j; ++k) {
      Complex dot(0.0, 0.0);
      for (std::size_t i = 0; i < n; ++i) {
        dot += std::conj(g.at(i, k)) * g.at(i, j);
      }
      for (std::size_t i = 0; i < n; ++i) g.at(i, j) -= dot * g.at(i, k);
    }
    double nrm = 0.0;
    for (std::size_t i = 0; i < n; ++i) nrm += std::norm(g.at(i, j));
    nrm = std::sqrt(nrm);
    for (std::size_t i = 0; i < n; ++i) g.at(i, j) /= nrm;
  }
  return g;
}

void criterion_12(unsigned) {
  RngStream rng(12001, 0);
  const std::size_t n = 100;
  const ComplexMatrix u = acceptance_unitary(n, rng);
  std::vector<Complex> want(n);
  for (auto& w : want) w = Complex(rng.uniform(-2, 2), rng.uniform(-2, 2));
  ComplexMatrix m(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      Complex s(0.0, 0.0);
      for (std::size_t k = 0; k < n; ++k) {
        s += u.at(i, k) * want[k] * std::conj(u.at(j, k));
      }
      m.at(i, j) = s;
    }
  }
  auto eig = eigenvalues(m);
  double worst = 0.0;
  std::vector<bool> used(n, false);
  for (const Complex& w : want) {
    double best = 1e300;
    std::size_t bi = 0;
    for (std::size_t k = 0; k < n; ++k) {
      if (used[k]) continue;
      const double d = std::abs(eig[k] - w);
      if (d < best) {
        best = d;
        bi = k;
      }
    }
    used[bi] = true;
    worst = std::max(worst, best);
  }
  require(worst <= 1e-8, "conjugated-diagonal recovery at n=100: max error "
          "%.2e <= 1e-8", worst);

  double worst_trace = 0.0, worst_det = 0.0;
  for (int rep = 0; rep < 100; ++rep) {
    const std::size_t nn = 10 + (rep % 6) * 10;
    const ComplexMatrix g = gaussian_matrix(nn, rng);
    const auto e = eigenvalues(g);
    Complex se(0.0, 0.0), pe(1.0, 0.0);
    for (const auto& v : e) {
      se += v;
      pe *= v;
    }
    worst_trace = std::max(worst_trace, std::abs(se - g.trace()) /
                                            (nn * g.max_abs()));
    const Complex det = lu_determinant(g);
    worst_det = std::max(worst_det, std::abs(pe - det) / std::abs(det));
  }
  require(worst_trace <= 1e-8,
          "trace identity on 100 random matrices: max %.2e <= 1e-8 (x n max)",
          worst_trace);
  require(worst_det <= 1e-6,
          "determinant identity on 100 random matrices: max rel %.2e <= 1e-6",
          worst_det);
}

}  // namespace

int main(int argc, char** argv) {
  int criterion = 0;
  unsigned threads = 0;
  for (int i = 1; i < argc; ++i) {
    if (std::strcmp(argv[i], "--criterion") == 0 && i + 1 < argc) {
      criterion = std::atoi(argv[++i]);
    } else if (std::strcmp(argv[i], "--threads") == 0 && i + 1 < argc) {
      threads = static_cast<unsigned>(std::atoi(argv[++i]));
    } else {
      std::fprintf(stderr, "usage: acceptance --criterion K [--threads T]\n");
      return 2;
    }
  }
  using Fn = void (*)(unsigned);
  const Fn fns[] = {criterion_1, criterion_2, criterion_3, criterion_4,
                    criterion_5, criterion_6, criterion_7, criterion_8,
                    criterion_9, criterion_10, criterion_11, criterion_12};
  const auto run_one = [&](int k) {
    check_count = fail_count = warn_count = 0;
    std::printf("criterion %d:\n", k);
    fns[k - 1](threads);
    const char* verdict =
        fail_count ? "FAIL" : (warn_count ? "WARN" : "PASS");
    std::printf("C%d %s (%d checks, %d failed, %d warned)\n", k, verdict,
                check_count, fail_count, warn_count);
    return fail_count == 0;
  };
  if (criterion >= 1 && criterion <= 12) {
    return run_one(criterion) ? 0 : 1;
  }
  bool all_ok = true;
  for (int k = 1; k <= 12; ++k) all_ok = run_one(k) && all_ok;
  return all_ok ? 0 : 1;
}
