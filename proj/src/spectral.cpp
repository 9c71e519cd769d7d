#include "sphqmc/spectral.hpp"

#include <cmath>
#include <limits>
#include <string>

namespace sphqmc {

namespace {
constexpr double kEps = std::numeric_limits<double>::epsilon();

double zeta_term(long l, double p) {
  const double lam = sphere_eigenvalue(l);
  return sphere_multiplicity(l) * std::pow(lam, -p);
}
}  // namespace

double real_gamma(double x) { return std::tgamma(x); }
double real_log_gamma(double x) { return std::lgamma(x); }

double zeta_tail_upper(long big_l, double p) {
  const double m = static_cast<double>(big_l) * (big_l + 1.0);
  return std::pow(m, 1.0 - p) / (p - 1.0);
}

ZetaResult zeta(double p, double tol) {
  if (p <= 1.0) {
    throw std::domain_error("zeta: divergent for p <= 1");
  }
  if (tol <= 0.0) throw std::invalid_argument("zeta: tol must be positive");

  const long l_max_cap = 300'000'000L;
  long big_l = 64;
  for (;;) {
    const double up = zeta_tail_upper(big_l, p);
    const double lo =
        std::pow((big_l + 1.0) * (big_l + 2.0), 1.0 - p) / (p - 1.0);
    const double half = 0.5 * (up - lo);
    if (half <= 0.5 * tol || big_l >= l_max_cap) {
      if (half > 0.5 * tol) {
        throw std::runtime_error(
            "zeta: requested tolerance unreachable; achievable ~" +
            std::to_string(2.0 * half));
      }
      // Kahan-compensated partial sum.
      double sum = 0.0, comp = 0.0;
      for (long l = 1; l <= big_l; ++l) {
        const double t = zeta_term(l, p) - comp;
        const double nxt = sum + t;
        comp = (nxt - sum) - t;
        sum = nxt;
      }
      double tail_mid, tail_err;
      if (p == 2.0) {
        // telescoping: sum_{l>L} (2l+1)/(l(l+1))^2 = 1/(L+1)^2 exactly
        tail_mid = 1.0 / ((big_l + 1.0) * (big_l + 1.0));
        tail_err = 0.0;
      } else {
        tail_mid = 0.5 * (up + lo);
        tail_err = half;
      }
      const double round_err = kEps * (static_cast<double>(big_l) + 4.0);
      return {sum + tail_mid, tail_err + round_err, big_l};
    }
    big_l *= 4;
  }
}

FredholmResult fredholm_determinant(double lambda_arg, double p, double tol) {
  if (p <= 1.0) throw std::domain_error("fredholm: requires p > 1");
  const double lam1p = std::pow(2.0, p);
  if (lambda_arg < 0.0 || lambda_arg >= lam1p) {
    throw std::domain_error(
        "fredholm: lambda must lie in [0, 2^p) = [0, " +
        std::to_string(lam1p) + ")");
  }
  if (lambda_arg == 0.0) return {1.0, 0.0, 0.0, 0};

  // The tail sum_{l>L} (2l+1) log(1 - lambda lambda_l^-p) expands exactly
  // into -sum_m (lambda^m/m) T_mp(L) with T_q(L) the zeta tails, each
  // bracketed by the integral sandwich.  Pick L from the m = 1 half-width.
  const auto tail_sandwich = [](long bl, double q, double& half) {
    const double up = zeta_tail_upper(bl, q);
    const double lo = std::pow((bl + 1.0) * (bl + 2.0), 1.0 - q) / (q - 1.0);
    half = 0.5 * (up - lo);
    return 0.5 * (up + lo);
  };
  long big_l = 1024;
  for (;;) {
    double half = 0.0;
    tail_sandwich(big_l, p, half);
    if (lambda_arg * half <= 0.25 * tol || big_l >= (1L << 26)) break;
    big_l *= 4;
  }

  double log_d = 0.0, comp = 0.0;
  for (long l = 1; l <= big_l; ++l) {
    const double x = lambda_arg * std::pow(sphere_eigenvalue(l), -p);
    const double t = sphere_multiplicity(l) * std::log1p(-x) - comp;
    const double nxt = log_d + t;
    comp = (nxt - log_d) - t;
    log_d = nxt;
  }

  const double x_next =
      lambda_arg * std::pow((big_l + 1.0) * (big_l + 2.0), -p);
  double log_err = kEps * (static_cast<double>(big_l) + 8.0);
  double lam_m = 1.0;
  for (int m = 1; m <= 400; ++m) {
    lam_m *= lambda_arg;
    double half = 0.0;
    const double mid = tail_sandwich(big_l, m * p, half);
    log_d -= lam_m / m * mid;
    log_err += lam_m / m * half;
    // remaining terms shrink at least by x_next per order
    const double rem = lam_m / (m + 1.0) * mid * x_next / (1.0 - x_next);
    if (rem <= 0.1 * tol || mid == 0.0) {
      log_err += rem;
      break;
    }
  }

  const double value = std::exp(log_d);
  return {value, log_d, value * (std::expm1(log_err) + 2.0 * kEps), big_l};
}

double fredholm_neg_log_series(double lambda_arg, double p, double tol) {
  const double lam1p = std::pow(2.0, p);
  if (lambda_arg < 0.0 || lambda_arg >= lam1p) {
    throw std::domain_error("fredholm series: lambda out of [0, 2^p)");
  }
  const double q = lambda_arg / lam1p;
  double sum = 0.0;
  double lam_pow = 1.0;
  double budget = 0.15 * tol;  // geometric per-order error budget
  for (int m = 1; m <= 400; ++m) {
    lam_pow *= lambda_arg;
    const double zm =
        zeta(m * p, std::max(budget * m / std::max(lam_pow, 1e-300), 1e-15))
            .value;
    budget *= 0.5;
    sum += zm * lam_pow / m;
    // remainder: Z(s) <= 2^-s (3 + 2/(s-1)) for the terms beyond m
    const double s_next = (m + 1) * p;
    const double z_up = std::pow(2.0, -s_next) * (3.0 + 2.0 / (s_next - 1.0));
    const double rem = z_up * std::pow(lambda_arg, m + 1) /
                       ((m + 1.0) * (1.0 - q));
    if (rem <= 0.5 * tol) return sum;
  }
  throw std::runtime_error("fredholm series: did not reach tolerance");
}

double comparison_constant(double s_prime, double s) {
  if (!(s_prime > 1.0) || !(s >= s_prime)) {
    throw std::domain_error("comparison_constant: requires 1 < s' <= s");
  }
  const double ratio = std::exp(real_log_gamma(s) - real_log_gamma(s_prime));
  const double top = std::pow(s, s) * std::exp(-s) + 1.0;
  return std::sqrt(ratio + top / (real_gamma(s_prime) * (s_prime - 1.0)));
}

bool comparison_claim_holds(double s_prime, double s, double wce_s,
                            double wce_s_prime) {
  if (wce_s > 1.0) return true;  // premise fails, claim is vacuous
  const double rhs =
      comparison_constant(s_prime, s) * std::pow(wce_s, s_prime / s);
  return wce_s_prime <= rhs * (1.0 + 1e-12);
}

double f_lambda(double lam, double eps, double c0) {
  if (!(lam > 0.0) || !(lam < 1.0)) {
    throw std::domain_error("f_lambda: lambda must lie in (0,1)");
  }
  if (!(eps > 0.0)) throw std::domain_error("f_lambda: eps must be positive");
  return lam * (1.0 / eps + c0 - 1.0) - std::log1p(-lam);
}

BoundParams BoundParams::from_delta(std::size_t n, double eps, double delta,
                                    double c0) {
  if (n == 0 || !(eps > 0.0) || !(delta > 0.0)) {
    throw std::invalid_argument("BoundParams: need n >= 1, eps > 0, delta > 0");
  }
  return {n, eps, delta, c0};
}

BoundParams BoundParams::from_r(std::size_t n, double eps, double r,
                                double c0) {
  // delta^2 = R^2 / (eps N^2)
  const double delta = r / (std::sqrt(eps) * static_cast<double>(n));
  return from_delta(n, eps, delta, c0);
}

double BoundParams::r_squared() const {
  const double dn = delta * static_cast<double>(n);
  return dn * dn * eps;
}

double BoundParams::eta() const { return 2.0 * kFourPi * r_squared() - 1.0; }

double BoundParams::eight_pi_d2n2() const {
  const double dn = delta * static_cast<double>(n);
  return 2.0 * kFourPi * dn * dn;
}

double optimal_lambda(const BoundParams& params) {
  const double r2_8pi = 2.0 * kFourPi * params.r_squared();
  const double denom_cond = 1.0 + (params.c0 - 1.0) * params.eps;
  if (!(r2_8pi > denom_cond)) {
    throw std::domain_error(
        "optimal_lambda: inadmissible, requires 8 pi R^2 > 1 + (C0-1) eps "
        "(got 8 pi R^2 = " +
        std::to_string(r2_8pi) + ")");
  }
  const double lam =
      1.0 - params.eps / (r2_8pi - 1.0 - (params.c0 - 1.0) * params.eps);
  if (!(lam > 0.0 && lam < 1.0)) {
    throw std::domain_error(
        "optimal_lambda: inadmissible, requires 8 pi R^2 > 1 + C0 eps so "
        "that lambda* lies in (0,1)");
  }
  // stationarity: f'(lambda*) = 8 pi delta^2 N^2
  const double fprime =
      (1.0 / params.eps + params.c0 - 1.0) + 1.0 / (1.0 - lam);
  const double target = params.eight_pi_d2n2();
  if (std::abs(fprime - target) >
      1e-10 * std::max(1.0, std::abs(target))) {
    throw std::runtime_error("optimal_lambda: stationarity check failed");
  }
  return lam;
}

double concentration_tail(const BoundParams& params) {
  const double lam = optimal_lambda(params);
  const double exponent = -0.5 * params.eight_pi_d2n2() * lam +
                          0.5 * f_lambda(lam, params.eps, params.c0);
  const double bound = std::exp(exponent);
  return std::min(1.0, std::max(0.0, bound));
}

ConfidenceReport explicit_confidence(std::size_t n, double eta) {
  if (n < 3) {
    throw std::domain_error("explicit_confidence: requires N >= 3");
  }
  const double log_n = std::log(static_cast<double>(n));
  if (!(eta > 2.0 / log_n)) {
    throw std::domain_error(
        "explicit_confidence: requires eta > 2/log N = " +
        std::to_string(2.0 / log_n));
  }
  const double r2 = (1.0 + eta) / (2.0 * kFourPi);
  if (!(r2 >= 1.0 / log_n)) {
    throw std::domain_error(
        "explicit_confidence: requires R^2 = (1+eta)/(8 pi) >= 1/log N");
  }
  ConfidenceReport rep;
  rep.n = n;
  rep.eta = eta;
  rep.r_squared = r2;
  rep.eps = 1.0 / log_n;
  rep.numerator = std::exp(1.0) * std::sqrt(r2) * std::sqrt(log_n);
  rep.wce_bound = rep.numerator / static_cast<double>(n);
  const auto failure = [&](double denom_shift) {
    const double expo = (1.0 + eta) / (eta - denom_shift / log_n) + 1.0;
    return std::sqrt(log_n) / std::pow(static_cast<double>(n), eta / 2.0) *
           std::sqrt(eta * std::exp(expo));
  };
  rep.failure_prob = failure(2.0);
  rep.failure_prob_variant = failure(1.0);
  return rep;
}

double moment_bound_rhs(double alpha, double eps, double tol) {
  if (!(alpha > 0.0 && alpha < kFourPi)) {
    throw std::domain_error("moment_bound_rhs: alpha must lie in (0, 4 pi)");
  }
  if (!(eps > 0.0)) {
    throw std::domain_error("moment_bound_rhs: eps must be positive");
  }
  const FredholmResult d =
      fredholm_determinant(alpha / kFourPi, 1.0 + eps, tol);
  return std::exp(-0.5 * d.log_value);
}

}  // namespace sphqmc
