#pragma once

// Special-function kernel: log-gamma, regularized incomplete gammas,
// generalized Marcum-Q (integer order), confluent hypergeometric 1F1,
// binomial coefficients. Pure functions, no shared mutable state.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string>

#include "mgsense/errors.hpp"

namespace mgsense {

struct AccuracyPolicy {
  double rel_tol = 1e-12;  // series / continued-fraction termination
  int max_terms = 10000;

  void check() const {
    if (!(rel_tol > 0.0) || !(rel_tol < 1e-3))
      throw domain_error("AccuracyPolicy: rel_tol must lie in (0, 1e-3)");
    if (max_terms < 100)
      throw domain_error("AccuracyPolicy: max_terms must be >= 100");
  }
};

inline double ln_gamma(double x) {
  if (!std::isfinite(x) || x <= 0.0)
    throw domain_error("ln_gamma: requires finite x > 0, got x=" + std::to_string(x));
#ifdef __linux__
  int sign = 0;
  return ::lgamma_r(x, &sign);
#else
  return std::lgamma(x);
#endif
}

namespace detail {

// P(a,x) by ascending series; valid and stable for x < a + 1.
inline double lower_gamma_series(double a, double x, const AccuracyPolicy& pol) {
  double ap = a;
  double del = 1.0 / a;
  double sum = del;
  for (int n = 0; n < pol.max_terms; ++n) {
    ap += 1.0;
    del *= x / ap;
    sum += del;
    if (std::fabs(del) < std::fabs(sum) * pol.rel_tol)
      return sum * std::exp(-x + a * std::log(x) - ln_gamma(a));
  }
  throw accuracy_error("lower_gamma_reg: series did not converge", sum, std::fabs(del / sum));
}

// Q(a,x) by modified-Lentz continued fraction; valid and stable for x >= a + 1.
inline double upper_gamma_cf(double a, double x, const AccuracyPolicy& pol) {
  const double tiny = 1e-300;
  double b = x + 1.0 - a;
  double c = 1.0 / tiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i <= pol.max_terms; ++i) {
    const double an = -static_cast<double>(i) * (i - a);
    b += 2.0;
    d = an * d + b;
    if (std::fabs(d) < tiny) d = tiny;
    c = b + an / c;
    if (std::fabs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double delta = d * c;
    h *= delta;
    if (std::fabs(delta - 1.0) <= pol.rel_tol)
      return h * std::exp(-x + a * std::log(x) - ln_gamma(a));
  }
  throw accuracy_error("upper_gamma_reg: continued fraction did not converge", h, 0.0);
}

inline void check_gamma_args(const char* fn, double a, double x) {
  if (!std::isfinite(a) || a <= 0.0)
    throw domain_error(std::string(fn) + ": requires a > 0");
  if (!std::isfinite(x) || x < 0.0)
    throw domain_error(std::string(fn) + ": requires x >= 0");
}

}  // namespace detail

/// Regularized upper incomplete gamma Q(a,x) = Gamma(a,x)/Gamma(a).
inline double upper_gamma_reg(double a, double x, const AccuracyPolicy& pol = {}) {
  detail::check_gamma_args("upper_gamma_reg", a, x);
  if (x == 0.0) return 1.0;
  if (x < a + 1.0) return 1.0 - detail::lower_gamma_series(a, x, pol);
  return detail::upper_gamma_cf(a, x, pol);
}

/// Regularized lower incomplete gamma P(a,x) = gamma(a,x)/Gamma(a).
inline double lower_gamma_reg(double a, double x, const AccuracyPolicy& pol = {}) {
  detail::check_gamma_args("lower_gamma_reg", a, x);
  if (x == 0.0) return 0.0;
  if (x < a + 1.0) return detail::lower_gamma_series(a, x, pol);
  return 1.0 - detail::upper_gamma_cf(a, x, pol);
}

/// Generalized Marcum Q_u(a,b) for integer order u >= 1: the tail beyond b^2
/// of a noncentral chi-squared law with 2u degrees of freedom and
/// noncentrality a^2. Poisson mixture of regularized upper gammas, summed
/// outward from the Poisson mode; the unaccumulated Poisson mass bounds the
/// truncation error because each gamma factor is <= 1.
inline double marcum_q(int order, double a, double b, const AccuracyPolicy& pol = {}) {
  if (order < 1)
    throw unsupported_error("marcum_q: integer order >= 1 required, got " +
                            std::to_string(order));
  if (!std::isfinite(a) || a < 0.0 || !std::isfinite(b) || b < 0.0)
    throw domain_error("marcum_q: requires a >= 0 and b >= 0");
  if (b == 0.0) return 1.0;
  const double y = 0.5 * b * b;
  if (a == 0.0) return upper_gamma_reg(order, y, pol);
  const double lam = 0.5 * a * a;

  const auto k0 = static_cast<long>(lam);
  // ln Poisson(k0; lam), gamma tail Q(order+k0, y) and its increment
  // t(m) = y^m e^{-y} / m! so that Q(m+1,y) = Q(m,y) + t(m).
  const double p_mode = std::exp(k0 * std::log(lam) - lam - ln_gamma(k0 + 1.0));
  const double q_mode = upper_gamma_reg(order + static_cast<double>(k0), y, pol);
  const double t_mode = std::exp((order + k0) * std::log(y) - y - ln_gamma(order + k0 + 1.0));

  double sum = p_mode * q_mode;
  double pois_cum = p_mode;

  // Backward from the mode first, so pois_cum accounts for (essentially all)
  // of the below-mode Poisson mass before the forward tail bound is applied.
  double p = p_mode, q = q_mode;
  double t = t_mode * (order + static_cast<double>(k0)) / y;  // t(order+k0-1)
  for (long k = k0 - 1; k >= 0; --k) {
    p *= static_cast<double>(k + 1) / lam;
    q -= t;
    if (q < 0.0) q = 0.0;
    t *= (order + static_cast<double>(k)) / y;
    sum += p * q;
    pois_cum += p;
    if (p < 1e-18) break;
  }

  // Forward: each gamma factor is <= 1, so the unaccumulated Poisson mass
  // bounds the truncation error. The mass bound saturates near machine
  // epsilon, so past the mode a vanishing Poisson term also ends the sum
  // (remaining contribution is then below ~1e-17 absolute).
  p = p_mode;
  q = q_mode;
  t = t_mode;
  long k = k0;
  bool converged = false;
  for (int i = 0; i < pol.max_terms; ++i) {
    if (1.0 - pois_cum <= pol.rel_tol * sum || (k > lam && p < 1e-18)) {
      converged = true;
      break;
    }
    ++k;
    p *= lam / static_cast<double>(k);
    q += t;
    t *= y / (order + static_cast<double>(k));
    sum += p * q;
    pois_cum += p;
  }
  if (!converged)
    throw accuracy_error("marcum_q: Poisson series did not converge", sum, 1.0 - pois_cum);

  return std::clamp(sum, 0.0, 1.0);
}

/// Ascending 1F1 series allowing a non-positive integer first parameter
/// (the series then terminates).
inline double kummer_1f1_signed_first(int a, int b, double z, const AccuracyPolicy& pol = {}) {
  if (b < 1) throw domain_error("kummer_1f1: requires integer b >= 1");
  double term = 1.0, sum = 1.0;
  for (int k = 0; k < pol.max_terms; ++k) {
    if (a + k == 0) return sum;  // Pochhammer hit zero: polynomial case
    term *= (a + k) * z / ((b + k) * (k + 1.0));
    sum += term;
    if (std::fabs(sum) > 1e305)
      throw mgsense::range_error("kummer_1f1: overflow");
    if (k > std::fabs(z) && std::fabs(term) <= pol.rel_tol * std::fabs(sum)) return sum;
  }
  throw accuracy_error("kummer_1f1: series did not converge", sum, term / sum);
}

/// Confluent hypergeometric 1F1(a; b; z) for integer a >= 0, integer b >= 1.
/// Ascending series for z >= 0 (all positive terms); Kummer transform
/// 1F1(a,b,z) = e^z 1F1(b-a,b,-z) for z < 0, where b-a <= 0 terminates.
inline double kummer_1f1(int a, int b, double z, const AccuracyPolicy& pol = {}) {
  if (a < 0 || b < 1)
    throw domain_error("kummer_1f1: requires integer a >= 0, b >= 1");
  if (!std::isfinite(z)) throw domain_error("kummer_1f1: z must be finite");
  if (a == 0 || z == 0.0) return 1.0;
  if (z < 0.0) {
    if (z < -700.0)
      throw mgsense::range_error("kummer_1f1: e^z underflow for z=" + std::to_string(z));
    return std::exp(z) * kummer_1f1_signed_first(b - a, b, -z, pol);
  }
  double term = 1.0, sum = 1.0;
  for (int k = 0; k < pol.max_terms; ++k) {
    term *= (a + k) * z / ((b + k) * (k + 1.0));
    sum += term;
    if (sum > 1e305)
      throw mgsense::range_error("kummer_1f1: overflow, a=" + std::to_string(a) +
                                 " b=" + std::to_string(b) + " z=" + std::to_string(z));
    if (k > z && term <= pol.rel_tol * sum) return sum;
  }
  throw accuracy_error("kummer_1f1: series did not converge", sum, term / sum);
}

/// Binomial coefficient as a double; exact for the small arguments used here.
inline double binom(int n, int k) {
  if (k < 0 || k > n) return 0.0;
  if (k > n - k) k = n - k;
  double r = 1.0;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

}  // namespace mgsense
