#pragma once

// Single-channel energy detection: conditional false-alarm/detection on AWGN,
// threshold inversion, and the channel-averaged detection probability over an
// MG model, by closed form and by quadrature.

#include <cmath>
#include <string>

#include "mgsense/errors.hpp"
#include "mgsense/mixture_gamma.hpp"
#include "mgsense/quadrature.hpp"
#include "mgsense/specfun.hpp"

namespace mgsense {

struct DetectorConfig {
  int u = 1;              // time-bandwidth product
  double lambda_n = 0.0;  // normalized threshold lambda / sigma_n^2

  void check() const {
    if (u < 1) throw domain_error("DetectorConfig: integer u >= 1 required");
    if (!(lambda_n >= 0.0) || !std::isfinite(lambda_n))
      throw domain_error("DetectorConfig: lambda_n >= 0 required");
  }
};

/// Pf = Gamma(u, lambda_n/2) / Gamma(u); channel-independent.
inline double prob_false_alarm(const DetectorConfig& cfg, const AccuracyPolicy& pol = {}) {
  cfg.check();
  return upper_gamma_reg(cfg.u, 0.5 * cfg.lambda_n, pol);
}

/// Conditional AWGN detection probability Pd = Q_u(sqrt(2 snr), sqrt(lambda_n)).
inline double prob_detection_awgn(const DetectorConfig& cfg, double snr,
                                  const AccuracyPolicy& pol = {}) {
  cfg.check();
  if (!(snr >= 0.0) || !std::isfinite(snr))
    throw domain_error("prob_detection_awgn: snr >= 0 required");
  return marcum_q(cfg.u, std::sqrt(2.0 * snr), std::sqrt(cfg.lambda_n), pol);
}

/// Inverts Pf(lambda_n) = target by bracketed bisection (Pf is strictly
/// decreasing in lambda_n). target must lie in (0, 1].
inline double threshold_for_pfa(int u, double target_pf, const AccuracyPolicy& pol = {}) {
  if (u < 1) throw domain_error("threshold_for_pfa: integer u >= 1 required");
  if (!(target_pf > 0.0)) {
    if (target_pf == 0.0)
      throw domain_error("threshold_for_pfa: Pf = 0 requires an unbounded threshold");
    throw domain_error("threshold_for_pfa: target_pf must lie in (0, 1]");
  }
  if (!(target_pf <= 1.0)) throw domain_error("threshold_for_pfa: target_pf must lie in (0, 1]");
  if (target_pf == 1.0) return 0.0;

  double lo = 0.0, hi = 2.0 * u + 2.0;
  while (upper_gamma_reg(u, 0.5 * hi, pol) > target_pf) {
    hi *= 2.0;
    if (hi > 1e9)
      throw accuracy_error("threshold_for_pfa: bracket expansion failed", hi, target_pf);
  }
  for (int i = 0; i < 200 && (hi - lo) > 1e-16 * hi; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (upper_gamma_reg(u, 0.5 * mid, pol) > target_pf)
      lo = mid;
    else
      hi = mid;
  }
  return 0.5 * (lo + hi);
}

namespace detail {

// Positive-term log-sum-exp accumulator.
struct LogAccumulator {
  double mx = -HUGE_VAL;
  double sum = 0.0;
  void add(double lx) {
    if (lx == -HUGE_VAL) return;
    if (lx <= mx) {
      sum += std::exp(lx - mx);
    } else {
      sum = sum * std::exp(mx - lx) + 1.0;
      mx = lx;
    }
  }
  double ln() const { return (sum > 0.0) ? mx + std::log(sum) : -HUGE_VAL; }
};

// ln of I_M(p, c) = int_0^inf Q_M(sqrt(2x), sqrt(lambda)) x^{p-1} e^{-c x} dx
// for integer p >= 1, c > 0:
//   I = Gamma(p) [ Qr(M, lambda/2) / c^p
//       + (lambda/2)^M e^{-lambda/2} / M! *
//         sum_{m=0}^{p-1} 1F1(m+1, M+1, (lambda/2)/(1+c)) / (c^{p-m} (1+c)^{m+1}) ].
// Every term is positive, so the whole evaluation lives in the log domain.
inline double ln_marcum_gamma_integral(int M, int p, double c, double lambda,
                                       const AccuracyPolicy& pol = {}) {
  const double lnc = std::log(c);
  const double ln1c = std::log1p(c);
  LogAccumulator acc;
  const double q = upper_gamma_reg(M, 0.5 * lambda, pol);
  if (q > 0.0) acc.add(std::log(q) - p * lnc);
  if (lambda > 0.0) {
    const double half = 0.5 * lambda;
    const double lnA = M * std::log(half) - half - ln_gamma(M + 1.0);
    const double z = half / (1.0 + c);
    for (int m = 0; m < p; ++m) {
      const double f = kummer_1f1(m + 1, M + 1, z, pol);
      acc.add(lnA + std::log(f) - (p - m) * lnc - (m + 1) * ln1c);
    }
  }
  return ln_gamma(static_cast<double>(p)) + acc.ln();
}

inline void require_integer_shapes(const MGDistribution& dist, const char* fn) {
  for (const auto& c : dist.components())
    if (c.shape < 1.0 || std::fabs(c.shape - std::round(c.shape)) > 1e-9)
      throw unsupported_error(std::string(fn) +
                              ": non-integer component shape; use the numeric path");
}

// x beyond which every component's gamma tail mass is below eps.
inline double mg_tail_cutoff(const MGDistribution& dist, double eps,
                             const AccuracyPolicy& pol = {}) {
  double cutoff = 0.0;
  for (const auto& c : dist.components()) {
    double lo = c.shape, hi = c.shape + 20.0;
    while (upper_gamma_reg(c.shape, hi, pol) > eps) hi *= 2.0;
    for (int i = 0; i < 80 && (hi - lo) > 1e-3 * hi; ++i) {
      const double mid = 0.5 * (lo + hi);
      if (upper_gamma_reg(c.shape, mid, pol) > eps)
        lo = mid;
      else
        hi = mid;
    }
    cutoff = std::max(cutoff, hi * dist.mean_snr() / c.rate);
  }
  return cutoff;
}

}  // namespace detail

/// Channel-averaged detection probability by adaptive quadrature of
/// int Q_u(sqrt(2x), sqrt(lambda_n)) f(x) dx. Accepts real shapes > 0.
inline double avg_pd_numeric(const DetectorConfig& cfg, const MGDistribution& dist,
                             const AccuracyPolicy& pol = {}) {
  cfg.check();
  require_valid(dist, Validation::relaxed);
  if (cfg.lambda_n == 0.0) return 1.0;
  const double hi = detail::mg_tail_cutoff(dist, 1e-12 / dist.size(), pol);
  const double sql = std::sqrt(cfg.lambda_n);
  auto integrand = [&](double x) {
    return marcum_q(cfg.u, std::sqrt(2.0 * x), sql, pol) * pdf(dist, x);
  };
  const double v = integrate(integrand, 0.0, hi, 1e-10);
  return std::clamp(v, 0.0, 1.0);
}

/// Channel-averaged detection probability in closed form (integer shapes):
///   Pd = sum_k w_k / g0^{s_k} * I_u(s_k, r_k / g0).
/// Terms are combined in the log domain; everything is positive.
inline double avg_pd_closed(const DetectorConfig& cfg, const MGDistribution& dist,
                            const AccuracyPolicy& pol = {}) {
  cfg.check();
  require_valid(dist, Validation::relaxed);
  detail::require_integer_shapes(dist, "avg_pd_closed");
  if (cfg.lambda_n == 0.0) return 1.0;
  const double g0 = dist.mean_snr();
  const double lng0 = std::log(g0);
  double total = 0.0;
  for (const auto& c : dist.components()) {
    const int p = static_cast<int>(std::llround(c.shape));
    const double lnw = std::log(c.weight) - c.shape * lng0;
    total += std::exp(lnw + detail::ln_marcum_gamma_integral(cfg.u, p, c.rate / g0,
                                                             cfg.lambda_n, pol));
  }
  return std::clamp(total, 0.0, 1.0);
}

}  // namespace mgsense
