#pragma once

// Monte Carlo oracle. Simulates the detector at the decision-statistic level:
// the normalized statistic under SNR g is a noncentral chi-squared draw with
// 2u degrees of freedom and noncentrality 2g, so P[Z > lambda_n] equals
// Q_u(sqrt(2g), sqrt(lambda_n)) exactly and no waveform simulation is needed.
// Trials own counter-based substreams keyed by (seed, trial index); results
// are independent of how trials are sharded across workers.

#include <cstdint>
#include <thread>
#include <variant>
#include <vector>

#include "mgsense/detector.hpp"
#include "mgsense/diversity.hpp"
#include "mgsense/errors.hpp"
#include "mgsense/mixture_gamma.hpp"
#include "mgsense/rng.hpp"

namespace mgsense {

enum class Hypothesis { h0, h1 };

struct FixedSnr {
  double snr = 0.0;
};

struct NLChannel {
  NakagamiLognormalSpec spec;
  double mean_snr = 1.0;
};

using Channel = std::variant<MGDistribution, NLChannel, FixedSnr>;

struct TrialPlan {
  long long n_trials = 1;
  std::uint64_t seed = 1;
  DetectorConfig cfg;
  DiversitySpec diversity;
  Channel channel = FixedSnr{0.0};
  int threads = 0;  // 0: hardware concurrency

  void check() const {
    if (n_trials < 1) throw domain_error("TrialPlan: n_trials >= 1 required");
    cfg.check();
    diversity.check();
    if (const auto* mg = std::get_if<MGDistribution>(&channel))
      require_valid(*mg, Validation::strict);
    if (const auto* nl = std::get_if<NLChannel>(&channel)) {
      nl->spec.check();
      if (!(nl->mean_snr > 0.0)) throw domain_error("TrialPlan: mean_snr > 0 required");
    }
    if (const auto* fx = std::get_if<FixedSnr>(&channel))
      if (!(fx->snr >= 0.0)) throw domain_error("TrialPlan: snr >= 0 required");
  }
};

struct TrialReport {
  long long trials = 0;
  long long detections = 0;
  double empirical_rate = 0.0;
  double ci_low = 0.0;   // 99% Wilson interval
  double ci_high = 0.0;
  std::uint64_t seed = 0;
};

/// One draw of the normalized decision statistic: sum of 2u squared unit
/// normals with the noncentrality sqrt(2 snr) on one mean.
inline double sample_energy_statistic(int u, double snr, Philox& rng) {
  if (u < 1) throw domain_error("sample_energy_statistic: u >= 1 required");
  if (!(snr >= 0.0)) throw domain_error("sample_energy_statistic: snr >= 0 required");
  double n0 = rng.normal() + std::sqrt(2.0 * snr);
  double z = n0 * n0;
  for (int i = 1; i < 2 * u; ++i) {
    const double n = rng.normal();
    z += n * n;
  }
  return z;
}

namespace detail {

inline double draw_branch_snr(const Channel& channel, Hypothesis hyp, Philox& rng) {
  if (hyp == Hypothesis::h0) return 0.0;
  if (const auto* mg = std::get_if<MGDistribution>(&channel)) return sample(*mg, rng);
  if (const auto* nl = std::get_if<NLChannel>(&channel))
    return sample_nl_snr(nl->spec, nl->mean_snr, rng);
  return std::get<FixedSnr>(channel).snr;
}

inline bool run_one_trial(const TrialPlan& plan, Hypothesis hyp, std::uint64_t index) {
  Philox rng(plan.seed, index);
  const int L = plan.diversity.branches;
  double sum = 0.0, mx = 0.0;
  for (int l = 0; l < L; ++l) {
    const double snr = draw_branch_snr(plan.channel, hyp, rng);
    const double z = sample_energy_statistic(plan.cfg.u, snr, rng);
    sum += z;
    if (z > mx) mx = z;
  }
  const double stat = (plan.diversity.scheme == Scheme::slc)   ? sum
                      : (plan.diversity.scheme == Scheme::sls) ? mx
                                                               : sum;  // none: L == 1
  return stat > plan.cfg.lambda_n;
}

inline void wilson_ci99(long long k, long long n, double& lo, double& hi) {
  constexpr double z = 2.5758293035489004;  // Phi^{-1}(0.995)
  const double nn = static_cast<double>(n);
  const double p = static_cast<double>(k) / nn;
  const double z2 = z * z;
  const double denom = 1.0 + z2 / nn;
  const double center = (p + z2 / (2.0 * nn)) / denom;
  const double half =
      z * std::sqrt(p * (1.0 - p) / nn + z2 / (4.0 * nn * nn)) / denom;
  lo = std::max(0.0, center - half);
  hi = std::min(1.0, center + half);
}

}  // namespace detail

/// Runs the trial plan under the given hypothesis, sharding across workers.
/// Identical seeds give identical reports at every parallelism degree.
inline TrialReport run_trials(const TrialPlan& plan, Hypothesis hyp) {
  plan.check();
  const long long n = plan.n_trials;
  int workers = plan.threads > 0
                    ? plan.threads
                    : static_cast<int>(std::thread::hardware_concurrency());
  if (workers < 1) workers = 1;
  if (workers > 64) workers = 64;
  if (static_cast<long long>(workers) > n) workers = static_cast<int>(n);

  std::vector<long long> counts(workers, 0);
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      const long long lo = n * w / workers;
      const long long hi = n * (w + 1) / workers;
      long long c = 0;
      for (long long i = lo; i < hi; ++i)
        if (detail::run_one_trial(plan, hyp, static_cast<std::uint64_t>(i))) ++c;
      counts[w] = c;
    });
  }
  for (auto& t : pool) t.join();

  TrialReport rep;
  rep.trials = n;
  for (long long c : counts) rep.detections += c;
  rep.empirical_rate = static_cast<double>(rep.detections) / static_cast<double>(n);
  detail::wilson_ci99(rep.detections, rep.trials, rep.ci_low, rep.ci_high);
  rep.seed = plan.seed;
  return rep;
}

}  // namespace mgsense
