#include "sphqmc/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace sphqmc {

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();

double cabs1(const Complex& z) { return std::abs(z.real()) + std::abs(z.imag()); }

// Parlett-Reinsch balancing with radix-2 scaling (diagonal similarity, so
// eigenvalues are preserved exactly).
void balance(ComplexMatrix& a) {
  const std::size_t n = a.n();
  bool converged = false;
  while (!converged) {
    converged = true;
    for (std::size_t i = 0; i < n; ++i) {
      double c = 0.0, r = 0.0;
      for (std::size_t j = 0; j < n; ++j) {
        if (j == i) continue;
        c += cabs1(a.at(j, i));
        r += cabs1(a.at(i, j));
      }
      if (c == 0.0 || r == 0.0) continue;
      const double s = c + r;
      double f = 1.0;
      while (c < r * 0.5) {
        c *= 2.0;
        r *= 0.5;
        f *= 2.0;
      }
      while (c >= r * 2.0) {
        c *= 0.5;
        r *= 2.0;
        f *= 0.5;
      }
      if ((c + r) < 0.95 * s && f != 1.0) {
        converged = false;
        const double inv = 1.0 / f;
        for (std::size_t j = 0; j < n; ++j) a.at(i, j) *= inv;
        for (std::size_t j = 0; j < n; ++j) a.at(j, i) *= f;
      }
    }
  }
}

// Householder reduction to upper Hessenberg form (in place).
void to_hessenberg(ComplexMatrix& a) {
  const std::size_t n = a.n();
  if (n < 3) return;
  std::vector<Complex> v(n), w(n);
  for (std::size_t k = 0; k + 2 < n; ++k) {
    double norm2 = 0.0;
    for (std::size_t i = k + 1; i < n; ++i) norm2 += std::norm(a.at(i, k));
    if (norm2 == 0.0) continue;
    const double norm = std::sqrt(norm2);
    const Complex x0 = a.at(k + 1, k);
    const double ax0 = std::abs(x0);
    const Complex sign = (ax0 > 0.0) ? x0 / ax0 : Complex(1.0, 0.0);
    const Complex alpha = -sign * norm;
    // v = x - alpha*e1; tau = 2 / |v|^2 (real)
    const std::size_t m = n - (k + 1);
    for (std::size_t i = 0; i < m; ++i) v[i] = a.at(k + 1 + i, k);
    v[0] -= alpha;
    const double vnorm2 = 2.0 * (norm2 + norm * ax0);
    if (vnorm2 == 0.0) continue;
    const double tau = 2.0 / vnorm2;

    // Left: A <- A - tau v (v^H A) on rows k+1..n-1, cols k..n-1.
    for (std::size_t j = k; j < n; ++j) w[j] = Complex(0.0, 0.0);
    for (std::size_t i = 0; i < m; ++i) {
      const Complex cv = std::conj(v[i]);
      const Complex* arow = a.row(k + 1 + i);
      for (std::size_t j = k; j < n; ++j) w[j] += cv * arow[j];
    }
    for (std::size_t i = 0; i < m; ++i) {
      const Complex tv = tau * v[i];
      Complex* arow = a.row(k + 1 + i);
      for (std::size_t j = k; j < n; ++j) arow[j] -= tv * w[j];
    }

    // Right: A <- A - tau (A v) v^H on all rows, cols k+1..n-1.
    for (std::size_t i = 0; i < n; ++i) {
      Complex s(0.0, 0.0);
      const Complex* arow = a.row(i);
      for (std::size_t j = 0; j < m; ++j) s += arow[k + 1 + j] * v[j];
      s *= tau;
      Complex* mrow = a.row(i);
      for (std::size_t j = 0; j < m; ++j) mrow[k + 1 + j] -= s * std::conj(v[j]);
    }

    a.at(k + 1, k) = alpha;
    for (std::size_t i = k + 2; i < n; ++i) a.at(i, k) = Complex(0.0, 0.0);
  }
}

struct Givens {
  double c;
  Complex s;
};

// Rotation with G (x, y)^T = (r, 0)^T, G = [[c, s], [-conj(s), c]], c real.
Givens make_givens(const Complex& x, const Complex& y, Complex& r_out) {
  const double ax = std::abs(x), ay = std::abs(y);
  if (ay == 0.0) {
    r_out = x;
    return {1.0, Complex(0.0, 0.0)};
  }
  if (ax == 0.0) {
    r_out = ay;
    return {0.0, std::conj(y) / ay};
  }
  const double d = std::hypot(ax, ay);
  const Complex sign = x / ax;
  r_out = sign * d;
  return {ax / d, sign * std::conj(y) / d};
}

Complex wilkinson_shift(const Complex& a, const Complex& b, const Complex& c,
                        const Complex& d) {
  const Complex p = 0.5 * (a - d);
  const Complex q = std::sqrt(p * p + b * c);
  Complex denom = p + q;
  const Complex alt = p - q;
  if (std::abs(alt) > std::abs(denom)) denom = alt;
  if (std::abs(denom) == 0.0) return d;
  return d - (b * c) / denom;
}

void solve_2x2(const Complex& a, const Complex& b, const Complex& c,
               const Complex& d, Complex& l1, Complex& l2) {
  const Complex tr = a + d;
  const Complex p = 0.5 * (a - d);
  const Complex q = std::sqrt(p * p + b * c);
  l1 = 0.5 * tr + q;
  l2 = 0.5 * tr - q;
  // Use the better-conditioned root and recover the other from the product.
  if (std::abs(l1) > std::abs(l2)) {
    const Complex det = a * d - b * c;
    if (std::abs(l1) > 0.0) l2 = det / l1;
  } else if (std::abs(l2) > 0.0) {
    const Complex det = a * d - b * c;
    l1 = det / l2;
  }
}

}  // namespace

ComplexMatrix ComplexMatrix::identity(std::size_t n) {
  ComplexMatrix m(n);
  for (std::size_t i = 0; i < n; ++i) m.at(i, i) = Complex(1.0, 0.0);
  return m;
}

Complex ComplexMatrix::trace() const {
  Complex t(0.0, 0.0);
  for (std::size_t i = 0; i < n_; ++i) t += at(i, i);
  return t;
}

double ComplexMatrix::max_abs() const {
  double m = 0.0;
  for (const auto& z : a_) m = std::max(m, std::abs(z));
  return m;
}

ComplexMatrix gaussian_matrix(std::size_t n, RngStream& rng,
                              double part_stddev) {
  ComplexMatrix m(n);  // rejects n = 0
  for (auto& z : m.data()) z = rng.complex_normal(part_stddev);
  return m;
}

ComplexMatrix solve(const ComplexMatrix& b, const ComplexMatrix& a) {
  if (b.n() != a.n()) {
    throw std::invalid_argument("solve: dimension mismatch");
  }
  const std::size_t n = b.n();
  ComplexMatrix lu = b;
  ComplexMatrix rhs = a;
  const double pivot_floor =
      static_cast<double>(n) * kEps * std::max(lu.max_abs(), 1e-300);

  for (std::size_t k = 0; k < n; ++k) {
    std::size_t piv = k;
    double best = std::abs(lu.at(k, k));
    for (std::size_t i = k + 1; i < n; ++i) {
      const double m = std::abs(lu.at(i, k));
      if (m > best) {
        best = m;
        piv = i;
      }
    }
    if (best <= pivot_floor) {
      throw singular_matrix_error("solve: pivot " + std::to_string(k) +
                                  " below threshold");
    }
    if (piv != k) {
      std::swap_ranges(lu.row(k), lu.row(k) + n, lu.row(piv));
      std::swap_ranges(rhs.row(k), rhs.row(k) + n, rhs.row(piv));
    }
    const Complex inv_pivot = Complex(1.0, 0.0) / lu.at(k, k);
    const Complex* lurow_k = lu.row(k);
    const Complex* rhsrow_k = rhs.row(k);
    for (std::size_t i = k + 1; i < n; ++i) {
      const Complex f = lu.at(i, k) * inv_pivot;
      if (f == Complex(0.0, 0.0)) continue;
      Complex* lurow_i = lu.row(i);
      Complex* rhsrow_i = rhs.row(i);
      for (std::size_t j = k + 1; j < n; ++j) lurow_i[j] -= f * lurow_k[j];
      for (std::size_t j = 0; j < n; ++j) rhsrow_i[j] -= f * rhsrow_k[j];
      lurow_i[k] = Complex(0.0, 0.0);
    }
  }

  // Back substitution, all right-hand sides at once.
  for (std::size_t kk = n; kk-- > 0;) {
    Complex* xrow = rhs.row(kk);
    const Complex* urow = lu.row(kk);
    for (std::size_t j = kk + 1; j < n; ++j) {
      const Complex f = urow[j];
      if (f == Complex(0.0, 0.0)) continue;
      const Complex* xj = rhs.row(j);
      for (std::size_t col = 0; col < n; ++col) xrow[col] -= f * xj[col];
    }
    const Complex inv = Complex(1.0, 0.0) / urow[kk];
    for (std::size_t col = 0; col < n; ++col) xrow[col] *= inv;
  }
  return rhs;
}

Complex lu_determinant(const ComplexMatrix& m) {
  const std::size_t n = m.n();
  ComplexMatrix lu = m;
  Complex det(1.0, 0.0);
  for (std::size_t k = 0; k < n; ++k) {
    std::size_t piv = k;
    double best = std::abs(lu.at(k, k));
    for (std::size_t i = k + 1; i < n; ++i) {
      const double v = std::abs(lu.at(i, k));
      if (v > best) {
        best = v;
        piv = i;
      }
    }
    if (best == 0.0) return Complex(0.0, 0.0);
    if (piv != k) {
      std::swap_ranges(lu.row(k), lu.row(k) + n, lu.row(piv));
      det = -det;
    }
    det *= lu.at(k, k);
    const Complex inv_pivot = Complex(1.0, 0.0) / lu.at(k, k);
    const Complex* rowk = lu.row(k);
    for (std::size_t i = k + 1; i < n; ++i) {
      const Complex f = lu.at(i, k) * inv_pivot;
      if (f == Complex(0.0, 0.0)) continue;
      Complex* rowi = lu.row(i);
      for (std::size_t j = k + 1; j < n; ++j) rowi[j] -= f * rowk[j];
    }
  }
  return det;
}

std::vector<Complex> eigenvalues(const ComplexMatrix& m) {
  for (const auto& z : m.data()) {
    if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) {
      throw std::invalid_argument("eigenvalues: non-finite entry");
    }
  }
  const std::size_t n = m.n();
  std::vector<Complex> eig;
  eig.reserve(n);
  if (n == 1) {
    eig.push_back(m.at(0, 0));
    return eig;
  }

  ComplexMatrix h = m;
  balance(h);
  to_hessenberg(h);

  double hnorm = 0.0;
  for (const auto& z : h.data()) hnorm = std::max(hnorm, std::abs(z));
  if (hnorm == 0.0) hnorm = 1.0;

  const std::size_t sweep_cap = 30 * n;
  std::size_t sweeps = 0;
  std::size_t hi = n - 1;
  std::size_t since_deflation = 0;

  while (true) {
    // Deflate any negligible subdiagonal entries at the bottom of the window.
    std::size_t lo = hi;
    while (lo > 0) {
      const double sub = std::abs(h.at(lo, lo - 1));
      double tol = kEps * (std::abs(h.at(lo - 1, lo - 1)) +
                           std::abs(h.at(lo, lo)));
      if (tol == 0.0) tol = kEps * hnorm;
      if (sub <= tol) {
        h.at(lo, lo - 1) = Complex(0.0, 0.0);
        break;
      }
      --lo;
    }

    if (lo == hi) {
      eig.push_back(h.at(hi, hi));
      since_deflation = 0;
      if (hi == 0) break;
      --hi;
      continue;
    }
    if (lo == hi - 1) {
      Complex l1, l2;
      solve_2x2(h.at(lo, lo), h.at(lo, hi), h.at(hi, lo), h.at(hi, hi), l1,
                l2);
      eig.push_back(l1);
      eig.push_back(l2);
      since_deflation = 0;
      if (lo == 0) break;
      hi = lo - 1;
      continue;
    }

    if (sweeps >= sweep_cap) {
      throw eigen_convergence_error(
          "eigenvalues: QR failed to converge after " +
          std::to_string(sweeps) + " sweeps (window " + std::to_string(lo) +
          ".." + std::to_string(hi) + ", subdiag " +
          std::to_string(std::abs(h.at(hi, hi - 1))) + ")");
    }

    Complex mu;
    if (since_deflation > 0 && since_deflation % 10 == 0) {
      // Exceptional shift to break potential cycles.
      const double s = std::abs(h.at(hi, hi - 1)) +
                       (hi >= lo + 2 ? std::abs(h.at(hi - 1, hi - 2)) : 0.0);
      mu = h.at(hi, hi) + Complex(0.75 * s, 0.0);
    } else {
      mu = wilkinson_shift(h.at(hi - 1, hi - 1), h.at(hi - 1, hi),
                           h.at(hi, hi - 1), h.at(hi, hi));
    }

    // Implicit single-shift sweep with Givens rotations on [lo, hi].
    Complex x = h.at(lo, lo) - mu;
    Complex y = h.at(lo + 1, lo);
    for (std::size_t k = lo; k < hi; ++k) {
      Complex r;
      const Givens g = make_givens(x, y, r);
      if (k > lo) {
        h.at(k, k - 1) = r;
        h.at(k + 1, k - 1) = Complex(0.0, 0.0);
      }
      // Left: rows k, k+1 on columns k..hi.
      {
        Complex* rk = h.row(k);
        Complex* rk1 = h.row(k + 1);
        const Complex cs = g.s;
        const Complex ccs = std::conj(g.s);
        const double c = g.c;
        for (std::size_t j = k; j <= hi; ++j) {
          const Complex t1 = rk[j];
          const Complex t2 = rk1[j];
          rk[j] = c * t1 + cs * t2;
          rk1[j] = -ccs * t1 + c * t2;
        }
      }
      // Right: columns k, k+1 on rows lo..min(hi, k+2).
      {
        const std::size_t imax = std::min(hi, k + 2);
        const Complex cs = g.s;
        const Complex ccs = std::conj(g.s);
        const double c = g.c;
        for (std::size_t i = lo; i <= imax; ++i) {
          Complex* ri = h.row(i);
          const Complex t1 = ri[k];
          const Complex t2 = ri[k + 1];
          ri[k] = c * t1 + ccs * t2;
          ri[k + 1] = -cs * t1 + c * t2;
        }
      }
      if (k + 1 < hi) {
        x = h.at(k + 1, k);
        y = h.at(k + 2, k);
      }
    }
    ++sweeps;
    ++since_deflation;
  }
  return eig;
}

}  // namespace sphqmc
