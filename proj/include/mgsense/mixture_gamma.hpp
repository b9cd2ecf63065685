#pragma once

// Mixture-Gamma SNR model: the channel-side object everything else consumes.
// A distribution is a weighted sum of gamma-type terms
//   f(x) = sum_k (w_k / g0) (x/g0)^{s_k - 1} exp(-r_k x / g0)
// with weights w_k, shapes s_k, rates r_k and mean-SNR scale g0, subject to
// sum_k w_k Gamma(s_k) / r_k^{s_k} = 1.

#include <cmath>
#include <cstddef>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "mgsense/errors.hpp"
#include "mgsense/quadrature.hpp"
#include "mgsense/rng.hpp"
#include "mgsense/specfun.hpp"

namespace mgsense {

// Two component rates within this relative gap are treated as equal wherever
// an equal/unequal-rate case split applies; exact float equality would be
// meaningless and the unequal-rate branch has a (r_i - r_j)^-n singularity.
inline constexpr double kRateEqualityTol = 1e-9;

inline bool rates_equal(double a, double b) {
  return std::fabs(a - b) <= kRateEqualityTol * std::max(a, b);
}

struct MGComponent {
  double weight;  // mixing coefficient (alpha)
  double shape;   // integer-valued on every closed-form path (beta)
  double rate;    // dimensionless rate (zeta)
};

inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }
inline double linear_to_db(double lin) { return 10.0 * std::log10(lin); }

class MGDistribution {
 public:
  MGDistribution(std::vector<MGComponent> components, double mean_snr)
      : components_(std::move(components)),
        mean_snr_(mean_snr),
        gamma0_db_(linear_to_db(mean_snr)) {
    if (components_.empty())
      throw degenerate_error("MGDistribution: at least one component required");
    if (!(mean_snr > 0.0) || !std::isfinite(mean_snr))
      throw domain_error("MGDistribution: mean_snr must be positive and finite");
  }

  // Keeps the given dB value verbatim so serialized documents round-trip
  // value-exactly; the linear scale is derived once.
  static MGDistribution from_db(std::vector<MGComponent> components, double gamma0_db) {
    MGDistribution d(std::move(components), db_to_linear(gamma0_db));
    d.gamma0_db_ = gamma0_db;
    return d;
  }

  const std::vector<MGComponent>& components() const { return components_; }
  std::size_t size() const { return components_.size(); }
  double mean_snr() const { return mean_snr_; }
  double gamma0_db() const { return gamma0_db_; }

  /// Mixing probability of component k: w Gamma(s) / r^s.
  double mixing_probability(std::size_t k) const {
    const MGComponent& c = components_[k];
    return c.weight * std::exp(ln_gamma(c.shape) - c.shape * std::log(c.rate));
  }

  double total_mass() const {
    double s = 0.0;
    for (std::size_t k = 0; k < size(); ++k) s += mixing_probability(k);
    return s;
  }

 private:
  std::vector<MGComponent> components_;
  double mean_snr_;
  double gamma0_db_;
};

enum class Validation { strict, relaxed };

struct ValidationIssue {
  std::string constraint;
  double residual;
};

struct ValidationReport {
  std::vector<ValidationIssue> issues;
  bool ok() const { return issues.empty(); }
  std::string str() const {
    std::ostringstream os;
    for (const auto& i : issues) os << i.constraint << " (residual " << i.residual << ")\n";
    return os.str();
  }
};

/// Checks the type invariants. strict additionally requires integer shapes
/// (the closed-form expressions assume them); relaxed admits any real
/// shape > 0 for the quadrature paths.
inline ValidationReport validate(const MGDistribution& dist,
                                 Validation mode = Validation::strict) {
  ValidationReport rep;
  for (std::size_t k = 0; k < dist.size(); ++k) {
    const MGComponent& c = dist.components()[k];
    if (!(c.weight > 0.0) || !std::isfinite(c.weight))
      rep.issues.push_back({"component " + std::to_string(k) + ": weight > 0", c.weight});
    if (!(c.rate > 0.0) || !std::isfinite(c.rate))
      rep.issues.push_back({"component " + std::to_string(k) + ": rate > 0", c.rate});
    if (!(c.shape > 0.0) || !std::isfinite(c.shape)) {
      rep.issues.push_back({"component " + std::to_string(k) + ": shape > 0", c.shape});
      continue;
    }
    if (mode == Validation::strict) {
      const double frac = std::fabs(c.shape - std::round(c.shape));
      if (c.shape < 1.0 || frac > 1e-9)
        rep.issues.push_back(
            {"component " + std::to_string(k) +
                 ": integer shape >= 1 required on the closed-form path "
                 "(use the numeric engine for real shapes)",
             frac});
    }
    if (c.weight > 0.0 && c.rate > 0.0) {
      const double p = dist.mixing_probability(k);
      if (p < 0.0 || p > 1.0 + 1e-9)
        rep.issues.push_back(
            {"component " + std::to_string(k) + ": weight*Gamma(shape)/rate^shape in [0,1]",
             p});
    }
  }
  if (rep.ok()) {
    const double residual = dist.total_mass() - 1.0;
    if (std::fabs(residual) > 1e-9)
      rep.issues.push_back({"sum of mixing probabilities = 1", residual});
  }
  return rep;
}

inline void require_valid(const MGDistribution& dist, Validation mode) {
  ValidationReport rep = validate(dist, mode);
  if (!rep.ok()) throw domain_error("invalid MGDistribution:\n" + rep.str());
}

/// Rescales all weights by the inverse total mass; weight ratios preserved.
inline MGDistribution normalize(const MGDistribution& dist) {
  for (const auto& c : dist.components())
    if (!(c.weight > 0.0)) throw degenerate_error("normalize: weights must be positive");
  const double mass = dist.total_mass();
  if (!(mass > 0.0) || !std::isfinite(mass))
    throw degenerate_error("normalize: degenerate total mass");
  std::vector<MGComponent> comps = dist.components();
  for (auto& c : comps) c.weight /= mass;
  MGDistribution out(std::move(comps), dist.mean_snr());
  return out;
}

/// Density at x >= 0 (per unit SNR).
inline double pdf(const MGDistribution& dist, double x) {
  if (!(x >= 0.0)) throw domain_error("pdf: x >= 0 required");
  const double g0 = dist.mean_snr();
  double s = 0.0;
  for (const auto& c : dist.components())
    s += c.weight / g0 * std::pow(x / g0, c.shape - 1.0) * std::exp(-c.rate * x / g0);
  return s;
}

inline double cdf(const MGDistribution& dist, double x) {
  if (!(x >= 0.0)) throw domain_error("cdf: x >= 0 required");
  const double g0 = dist.mean_snr();
  double s = 0.0;
  for (std::size_t k = 0; k < dist.size(); ++k) {
    const MGComponent& c = dist.components()[k];
    s += dist.mixing_probability(k) * lower_gamma_reg(c.shape, c.rate * x / g0);
  }
  return s;
}

/// Analytic mean: g0 * sum_k w_k Gamma(s_k + 1) / r_k^{s_k + 1}.
inline double mean_snr_check(const MGDistribution& dist) {
  double s = 0.0;
  for (const auto& c : dist.components())
    s += c.weight * std::exp(ln_gamma(c.shape + 1.0) - (c.shape + 1.0) * std::log(c.rate));
  return dist.mean_snr() * s;
}

/// One SNR draw: pick a component by mixing probability, then a gamma draw.
/// Integer shapes only (strict model).
inline double sample(const MGDistribution& dist, Philox& rng) {
  const double u = rng.uniform() * dist.total_mass();
  double acc = 0.0;
  std::size_t pick = dist.size() - 1;
  for (std::size_t k = 0; k < dist.size(); ++k) {
    acc += dist.mixing_probability(k);
    if (u <= acc) {
      pick = k;
      break;
    }
  }
  const MGComponent& c = dist.components()[pick];
  const int shape = static_cast<int>(std::llround(c.shape));
  return rng.gamma_int(shape) * dist.mean_snr() / c.rate;
}

inline MGDistribution from_rayleigh(double mean_snr) {
  return MGDistribution({{1.0, 1.0, 1.0}}, mean_snr);
}

/// Nakagami-m SNR is gamma(m, m/g0): single component w = m^m/Gamma(m).
inline MGDistribution from_nakagami(int m, double mean_snr) {
  if (m < 1) throw domain_error("from_nakagami: integer m >= 1 required");
  const double md = m;
  const double w = std::exp(md * std::log(md) - ln_gamma(md));
  return MGDistribution({{w, md, md}}, mean_snr);
}

// ---------------------------------------------------------------------------
// Nakagami-lognormal composite channel.

struct NakagamiLognormalSpec {
  int m = 1;                    // multipath severity
  double shadow_sigma_db = 1.0; // shadow standard deviation, dB
  double shadow_mu_db = 0.0;    // shadow mean offset, dB
  int n_components = 15;        // Gauss-Hermite fit order

  void check() const {
    if (m < 1) throw domain_error("NakagamiLognormalSpec: m >= 1 required");
    if (!(shadow_sigma_db > 0.0))
      throw domain_error("NakagamiLognormalSpec: shadow_sigma_db > 0 required");
    if (n_components < 2)
      throw domain_error("NakagamiLognormalSpec: n_components >= 2 required");
  }
};

namespace detail {

inline constexpr double kLn10 = 2.302585092994045684018;

// Conditional branch mean for shadow coordinate t (a unit-variance normal is
// sqrt(2) t under the e^{-t^2} weight). The shadow multiplier is normalized to
// unit mean, so E[snr] = mean_snr regardless of mu/sigma; any constant dB
// offset in mu is absorbed by the normalization.
inline double nl_theta(const NakagamiLognormalSpec& spec, double mean_snr, double t) {
  const double sl = spec.shadow_sigma_db * kLn10 / 10.0;
  const double kappa = std::pow(10.0, spec.shadow_mu_db / 10.0) * std::exp(0.5 * sl * sl);
  return mean_snr *
         std::pow(10.0, (spec.shadow_mu_db + std::sqrt(2.0) * spec.shadow_sigma_db * t) / 10.0) /
         kappa;
}

inline double gamma_pdf(double x, double shape, double rate) {
  if (x < 0.0) return 0.0;
  if (x == 0.0) return shape == 1.0 ? rate : (shape > 1.0 ? 0.0 : HUGE_VAL);
  return std::exp(shape * std::log(rate) + (shape - 1.0) * std::log(x) - rate * x -
                  ln_gamma(shape));
}

}  // namespace detail

/// Exact NL SNR density by quadrature over the shadow.
inline double nl_exact_pdf(const NakagamiLognormalSpec& spec, double mean_snr, double x) {
  spec.check();
  if (!(x >= 0.0)) throw domain_error("nl_exact_pdf: x >= 0 required");
  constexpr double kInvSqrtPi = 0.5641895835477562869481;
  auto integrand = [&](double t) {
    const double theta = detail::nl_theta(spec, mean_snr, t);
    return kInvSqrtPi * std::exp(-t * t) * detail::gamma_pdf(x, spec.m, spec.m / theta);
  };
  return integrate(integrand, -9.0, 9.0, 1e-13, 1e-10);
}

/// One physical NL SNR draw (gamma multipath scaled by the lognormal shadow),
/// bypassing the MG approximation.
inline double sample_nl_snr(const NakagamiLognormalSpec& spec, double mean_snr, Philox& rng) {
  spec.check();
  const double theta = detail::nl_theta(spec, mean_snr, rng.normal() / std::sqrt(2.0));
  return rng.gamma_int(spec.m) * theta / spec.m;
}

struct NLFit {
  MGDistribution dist;
  double ise;  // integrated squared error of the fit pdf vs the exact NL pdf
};

/// Gauss-Hermite MG fit of the NL channel: n_components gamma terms, all with
/// shape m. The mean is then enforced exactly by rescaling rates.
inline NLFit fit_nakagami_lognormal(const NakagamiLognormalSpec& spec, double mean_snr) {
  spec.check();
  if (!(mean_snr > 0.0)) throw domain_error("fit_nakagami_lognormal: mean_snr > 0 required");
  std::vector<double> t, w;
  gauss_hermite(spec.n_components, t, w);
  const int C = spec.n_components;
  const double md = spec.m;
  std::vector<double> probs(C), rates(C);
  constexpr double kInvSqrtPi = 0.5641895835477562869481;
  for (int i = 0; i < C; ++i) {
    probs[i] = w[i] * kInvSqrtPi;
    rates[i] = md * mean_snr / detail::nl_theta(spec, mean_snr, t[i]);
  }
  double psum = 0.0, meanfac = 0.0;
  for (int i = 0; i < C; ++i) psum += probs[i];
  for (int i = 0; i < C; ++i) {
    probs[i] /= psum;
    meanfac += probs[i] * md / rates[i];
  }
  std::vector<MGComponent> comps(C);
  for (int i = 0; i < C; ++i) {
    const double r = rates[i] * meanfac;  // exact mean enforcement
    comps[i] = {probs[i] * std::exp(md * std::log(r) - ln_gamma(md)), md, r};
  }
  MGDistribution dist(std::move(comps), mean_snr);
  dist = normalize(dist);

  auto sq = [&](double x) {
    const double d = pdf(dist, x) - nl_exact_pdf(spec, mean_snr, x);
    return d * d;
  };
  const double ise = integrate(sq, 0.0, 20.0 * mean_snr, 1e-10, 1e-6);
  return {std::move(dist), ise};
}

/// Fit constructor; fails if the fit misses the quality target.
inline MGDistribution from_nakagami_lognormal(const NakagamiLognormalSpec& spec,
                                              double mean_snr) {
  NLFit fit = fit_nakagami_lognormal(spec, mean_snr);
  if (!(fit.ise <= 1e-4))
    throw fit_quality_error("from_nakagami_lognormal: fit ISE " + std::to_string(fit.ise) +
                                " exceeds 1e-4; increase n_components",
                            fit.ise);
  return fit.dist;
}

}  // namespace mgsense
