#pragma once

#include <cstddef>
#include <stdexcept>

namespace sphqmc {

inline constexpr double kFourPi = 12.566370614359172954;

// Laplace spectrum of the round two-sphere: eigenvalue l(l+1) with
// multiplicity 2l+1 for l >= 1.
inline double sphere_eigenvalue(long l) {
  return static_cast<double>(l) * (static_cast<double>(l) + 1.0);
}
inline double sphere_multiplicity(long l) { return 2.0 * l + 1.0; }

// Upper bound constant for the zeta tail, Tr(Delta^-(1+eps)) <= 1/eps + C0.
inline constexpr double kZetaC0 = 2.0;
// Tr(Delta^-2) on the sphere.
inline constexpr double kZetaC1 = 1.0;

// Gamma via the C library (Lanczos-class rational approximation, relative
// accuracy well under 1e-12 on the arguments used here).
double real_gamma(double x);
double real_log_gamma(double x);

struct ZetaResult {
  double value = 0.0;
  double error = 0.0;  // certified absolute bound
  long truncation_l = 0;
};

// Z(p) = sum_{l>=1} (2l+1) / (l(l+1))^p with certified error <= tol.
// The tail is the exact telescoping 1/(L+1)^2 at p = 2 and the integral
// sandwich ((L(L+1))^(1-p) vs ((L+1)(L+2))^(1-p)) / (p-1) otherwise.
ZetaResult zeta(double p, double tol);

// Certified upper bound on sum_{l>L} (2l+1)/(l(l+1))^p.
double zeta_tail_upper(long big_l, double p);

struct FredholmResult {
  double value = 0.0;      // det(I - lambda * Delta^-p)
  double log_value = 0.0;  // log of the value
  double error = 0.0;      // certified absolute bound on the value
  long truncation_l = 0;
};

// Fredholm determinant prod_{l>=1} (1 - lambda (l(l+1))^-p)^(2l+1),
// defined for 0 <= lambda < 2^p.  Certified via the log-series remainder.
FredholmResult fredholm_determinant(double lambda_arg, double p, double tol);

// -log det from the trace power series sum_m Z(mp) lambda^m / m; independent
// route used to cross-check fredholm_determinant.
double fredholm_neg_log_series(double lambda_arg, double p, double tol);

// c(s', s) = sqrt(Gamma(s)/Gamma(s') + (s^s e^-s + 1) / (Gamma(s')(s'-1)))
// for 1 < s' <= s; controls wce(.; s') <= c(s',s) wce(.; s)^(s'/s) whenever
// wce(.; s) <= 1.
double comparison_constant(double s_prime, double s);

// The comparison claim as a checkable predicate.  Returns false only when the
// premise wce_s <= 1 holds and the inequality fails.
bool comparison_claim_holds(double s_prime, double s, double wce_s,
                            double wce_s_prime);

// f(lambda) = lambda (1/eps + C0 - 1) - log(1 - lambda) on (0,1); strictly
// convex, f(0+) = 0, f(1-) = infinity.
double f_lambda(double lam, double eps, double c0 = kZetaC0);

// Inputs of the concentration calculators.  delta^2 = R^2 / (eps N^2) and
// 8 pi R^2 = 1 + eta tie the parameterizations together.
struct BoundParams {
  std::size_t n = 0;
  double eps = 0.0;
  double delta = 0.0;
  double c0 = kZetaC0;

  static BoundParams from_delta(std::size_t n, double eps, double delta,
                                double c0 = kZetaC0);
  static BoundParams from_r(std::size_t n, double eps, double r,
                            double c0 = kZetaC0);

  double r_squared() const;       // R^2 = delta^2 N^2 eps
  double eta() const;             // 8 pi R^2 - 1
  double eight_pi_d2n2() const;   // 8 pi delta^2 N^2
};

// lambda* = 1 - eps / (8 pi R^2 - 1 - (C0-1) eps), the minimizer of
// -4 pi delta^2 N^2 lambda + f(lambda)/2.  Requires lambda* in (0,1), i.e.
// 8 pi R^2 > 1 + C0 eps; the stationarity f'(lambda*) = 8 pi delta^2 N^2 is
// verified to 1e-10 before returning.
double optimal_lambda(const BoundParams& params);

// exp(-4 pi delta^2 N^2 lambda* + f(lambda*)/2), clipped to [0,1].
double concentration_tail(const BoundParams& params);

struct ConfidenceReport {
  std::size_t n = 0;
  double eta = 0.0;
  double r_squared = 0.0;
  double eps = 0.0;        // 1 / log N
  double numerator = 0.0;  // e sqrt((1+eta)/(8 pi)) sqrt(log N)
  double wce_bound = 0.0;  // numerator / N
  double failure_prob = 0.0;        // eta - 2/log N denominator (conservative)
  double failure_prob_variant = 0.0;  // eta - 1/log N denominator
};

// Explicit high-confidence bound on wce(.; 2) for the spherical ensemble:
// wce <= e sqrt((1+eta)/(8 pi)) sqrt(log N)/N outside probability
// failure_prob.  Requires N >= 3, eta > 2/log N and R^2 >= 1/log N.
ConfidenceReport explicit_confidence(std::size_t n, double eta);

// det(I - (alpha/4pi) Delta^-(1+eps))^(-1/2): the bound on
// E exp(alpha N^2 wce(.; 2+eps)^2).  Requires alpha in (0, 4 pi).
double moment_bound_rhs(double alpha, double eps, double tol);

}  // namespace sphqmc
