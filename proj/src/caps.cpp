#include <algorithm>
#include <cmath>
#include <vector>

#include "sphqmc/metrics.hpp"
#include "sphqmc/parallel.hpp"

namespace sphqmc {

namespace {

struct Vec3 {
  double x, y, z;
};

Vec3 normalized_or_zero(double x, double y, double z) {
  const double n = std::sqrt(x * x + y * y + z * z);
  if (n < 1e-12) return {0.0, 0.0, 0.0};
  return {x / n, y / n, z / n};
}

// sup over cap heights of |sigma(C) - empirical(C)| for caps centered at w.
// Evaluates both the closed and the open cap at every jump of the empirical
// count, which covers the one-sided limits.
double sup_over_heights(const Configuration& c, const Vec3& w) {
  const std::size_t n = c.n();
  std::vector<double> proj(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& p = c.points[i];
    proj[i] = std::clamp(p.x * w.x + p.y * w.y + p.z * w.z, -1.0, 1.0);
  }
  std::sort(proj.begin(), proj.end(), std::greater<double>());
  double best = 0.0;
  std::size_t a = 0;
  while (a < n) {
    std::size_t b = a;
    while (b < n && proj[b] == proj[a]) ++b;
    const double sigma = 0.5 * (1.0 - proj[a]);
    const double open_cnt = static_cast<double>(a) / n;    // strictly above
    const double closed_cnt = static_cast<double>(b) / n;  // at least t
    best = std::max(best, std::abs(sigma - open_cnt));
    best = std::max(best, std::abs(sigma - closed_cnt));
    a = b;
  }
  return best;
}

double best_over_candidates(const Configuration& c,
                            const std::vector<Vec3>& cands,
                            unsigned threads) {
  if (cands.empty()) return 0.0;
  const std::size_t block = 256;
  const std::size_t n_blocks = (cands.size() + block - 1) / block;
  std::vector<double> partial(n_blocks, 0.0);
  parallel_jobs(n_blocks, threads, [&](std::size_t bi) {
    double best = 0.0;
    const std::size_t lo = bi * block;
    const std::size_t hi = std::min(cands.size(), lo + block);
    for (std::size_t i = lo; i < hi; ++i) {
      best = std::max(best, sup_over_heights(c, cands[i]));
    }
    partial[bi] = best;
  });
  double best = 0.0;
  for (double v : partial) best = std::max(best, v);
  return best;
}

}  // namespace

CapL2Result cap_discrepancy_l2(const Configuration& c, std::size_t mc_caps,
                               RngStream& rng) {
  if (mc_caps == 0) {
    throw std::invalid_argument("cap_discrepancy_l2: mc_caps must be >= 1");
  }
  const std::size_t n = c.n();
  double sum = 0.0, sum2 = 0.0;
  for (std::size_t k = 0; k < mc_caps; ++k) {
    Vec3 w;
    do {
      w = normalized_or_zero(rng.normal(), rng.normal(), rng.normal());
    } while (w.x == 0.0 && w.y == 0.0 && w.z == 0.0);
    const double t = rng.uniform(-1.0, 1.0);
    std::size_t cnt = 0;
    for (const auto& p : c.points) {
      if (p.x * w.x + p.y * w.y + p.z * w.z >= t) ++cnt;
    }
    const double d = 0.5 * (1.0 - t) - static_cast<double>(cnt) / n;
    sum += d * d;
    sum2 += d * d * d * d;
  }
  const double mean = sum / mc_caps;
  const double var = std::max(0.0, sum2 / mc_caps - mean * mean);
  return {mean, std::sqrt(var / mc_caps), mc_caps};
}

double cap_discrepancy_l2_exact(const Configuration& c) {
  const std::size_t n = c.n();
  double dist = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      dist += c.points[i].chordal_distance(c.points[j]);
    }
  }
  const double mean_dist = 2.0 * dist / (static_cast<double>(n) * n);
  return (4.0 / 3.0 - mean_dist) / 8.0;
}

double cap_discrepancy_linf(const Configuration& c, CapLinfMode mode,
                            RngStream* rng, unsigned threads) {
  const std::size_t n = c.n();
  std::vector<Vec3> cands;

  // singles: vanishing / almost-full caps centered on the points
  for (const auto& p : c.points) {
    cands.push_back({p.x, p.y, p.z});
    cands.push_back({-p.x, -p.y, -p.z});
  }

  if (mode == CapLinfMode::exact_small_n) {
    if (n > 300) {
      throw std::invalid_argument(
          "cap_discrepancy_linf: exact mode supports N <= 300; use the "
          "randomized mode");
    }
    // pairs at extremal height: boundary circle through x_i, x_j
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = i + 1; j < n; ++j) {
        const auto& a = c.points[i];
        const auto& b = c.points[j];
        const Vec3 v =
            normalized_or_zero(a.x + b.x, a.y + b.y, a.z + b.z);
        if (v.x != 0.0 || v.y != 0.0 || v.z != 0.0) {
          cands.push_back(v);
          cands.push_back({-v.x, -v.y, -v.z});
        }
      }
    }
    // triples: boundary circle through x_i, x_j, x_k
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = i + 1; j < n; ++j) {
        for (std::size_t k = j + 1; k < n; ++k) {
          const auto& a = c.points[i];
          const auto& b = c.points[j];
          const auto& d = c.points[k];
          const double ux = b.x - a.x, uy = b.y - a.y, uz = b.z - a.z;
          const double vx = d.x - a.x, vy = d.y - a.y, vz = d.z - a.z;
          const Vec3 w = normalized_or_zero(
              uy * vz - uz * vy, uz * vx - ux * vz, ux * vy - uy * vx);
          if (w.x != 0.0 || w.y != 0.0 || w.z != 0.0) {
            cands.push_back(w);
            cands.push_back({-w.x, -w.y, -w.z});
          }
        }
      }
    }
    return best_over_candidates(c, cands, threads);
  }

  // randomized: candidate centers plus multi-start local search; the result
  // is a lower bound on the sup.
  if (rng == nullptr) {
    throw std::invalid_argument(
        "cap_discrepancy_linf: randomized mode needs an RngStream");
  }
  const std::size_t n_random = 256;
  for (std::size_t k = 0; k < n_random; ++k) {
    Vec3 w;
    do {
      w = normalized_or_zero(rng->normal(), rng->normal(), rng->normal());
    } while (w.x == 0.0 && w.y == 0.0 && w.z == 0.0);
    cands.push_back(w);
  }
  // a subset of pair bisectors
  const std::size_t pair_budget = 512;
  for (std::size_t k = 0; k < pair_budget && n >= 2; ++k) {
    const std::size_t i = static_cast<std::size_t>(rng->uniform() * n);
    std::size_t j = static_cast<std::size_t>(rng->uniform() * n);
    if (j == i) j = (j + 1) % n;
    const auto& a = c.points[std::min(i, n - 1)];
    const auto& b = c.points[std::min(j, n - 1)];
    const Vec3 v = normalized_or_zero(a.x + b.x, a.y + b.y, a.z + b.z);
    if (v.x != 0.0 || v.y != 0.0 || v.z != 0.0) cands.push_back(v);
  }

  double best = 0.0;
  Vec3 best_w = cands.front();
  for (const auto& w : cands) {
    const double v = sup_over_heights(c, w);
    if (v > best) {
      best = v;
      best_w = w;
    }
  }
  // hill climb around the best center
  double step = 0.2;
  while (step > 1e-6) {
    bool improved = false;
    for (int trial = 0; trial < 24; ++trial) {
      const Vec3 w = normalized_or_zero(best_w.x + step * rng->normal(),
                                        best_w.y + step * rng->normal(),
                                        best_w.z + step * rng->normal());
      if (w.x == 0.0 && w.y == 0.0 && w.z == 0.0) continue;
      const double v = sup_over_heights(c, w);
      if (v > best) {
        best = v;
        best_w = w;
        improved = true;
      }
    }
    if (!improved) step *= 0.5;
  }
  return best;
}

}  // namespace sphqmc
