#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "mgsense/detector.hpp"
#include "mgsense/simkit.hpp"
#include "oracles.hpp"

using namespace mgsense;

TEST_CASE("false-alarm probability closed values") {
  CHECK(prob_false_alarm({2, 0.0}) == 1.0);
  CHECK(prob_false_alarm({1, 2.0}) == Catch::Approx(std::exp(-1.0)).epsilon(1e-13));
  CHECK(prob_false_alarm({2, 5.0}) ==
        Catch::Approx(3.5 * std::exp(-2.5)).epsilon(1e-13));
  // strictly decreasing in lambda
  double prev = 1.0;
  for (double lam = 0.5; lam < 40.0; lam += 0.5) {
    const double pf = prob_false_alarm({3, lam});
    CHECK(pf < prev);
    prev = pf;
  }
}

TEST_CASE("conditional detection probability on AWGN") {
  CHECK(prob_detection_awgn({2, 4.0}, 0.0) ==
        Catch::Approx(prob_false_alarm({2, 4.0})).margin(1e-15));
  CHECK(prob_detection_awgn({2, 4.0}, 0.0) ==
        Catch::Approx(3.0 * std::exp(-2.0)).epsilon(1e-13));
  CHECK(prob_detection_awgn({1, 0.0}, 7.0) == 1.0);
  // noncentral-chi2(4 dof, nc 10) tail beyond 4 (frozen series value)
  CHECK(prob_detection_awgn({2, 4.0}, 5.0) ==
        Catch::Approx(0.9617897855973779).epsilon(1e-12));
  CHECK_THROWS_AS(prob_detection_awgn({2, 4.0}, -1.0), domain_error);
}

TEST_CASE("threshold inversion") {
  CHECK(threshold_for_pfa(1, 1.0) == 0.0);
  CHECK(threshold_for_pfa(1, std::exp(-1.0)) == Catch::Approx(2.0).epsilon(1e-12));
  // frozen bisection-oracle value for u=2, target 0.1
  CHECK(threshold_for_pfa(2, 0.1) == Catch::Approx(7.779440339734858).epsilon(1e-12));
  CHECK_THROWS_AS(threshold_for_pfa(2, 0.0), domain_error);
  CHECK_THROWS_AS(threshold_for_pfa(2, 1.5), domain_error);
  CHECK_THROWS_AS(threshold_for_pfa(2, -0.25), domain_error);

  // threshold_for_pfa o prob_false_alarm is the identity on lambda
  for (int u : {1, 2, 4, 7})
    for (double lam : {0.2, 1.0, 3.5, 9.0, 22.0}) {
      const double pf = prob_false_alarm({u, lam});
      CHECK(threshold_for_pfa(u, pf) == Catch::Approx(lam).epsilon(1e-10));
      CHECK(prob_false_alarm({u, threshold_for_pfa(u, pf)}) ==
            Catch::Approx(pf).margin(1e-12));
    }
}

TEST_CASE("avg_pd trivial reductions") {
  const MGDistribution ray = from_rayleigh(10.0);
  CHECK(avg_pd_numeric({2, 0.0}, ray) == 1.0);
  CHECK(avg_pd_closed({2, 0.0}, ray) == 1.0);
  // vanishing SNR: averaged Pd collapses to Pf
  const MGDistribution tiny = from_rayleigh(1e-8);
  const DetectorConfig cfg{2, 4.0};
  CHECK(avg_pd_numeric(cfg, tiny) ==
        Catch::Approx(prob_false_alarm(cfg)).margin(1e-6));
}

TEST_CASE("closed form equals quadrature") {
  const MGDistribution ray = from_rayleigh(10.0);
  CHECK(avg_pd_closed({2, 5.0}, ray) ==
        Catch::Approx(avg_pd_numeric({2, 5.0}, ray)).margin(1e-7));

  oracles::ModelBattery battery(2025);
  for (int i = 0; i < 10; ++i) {
    const MGDistribution d = battery.next();
    for (int u : {1, 2, 4}) {
      const double lam = threshold_for_pfa(u, 0.05 + 0.1 * i);
      const DetectorConfig cfg{u, lam};
      CHECK(avg_pd_closed(cfg, d) ==
            Catch::Approx(avg_pd_numeric(cfg, d)).margin(1e-7));
    }
  }
}

TEST_CASE("closed form equals the independent Rayleigh formula") {
  for (int u : {1, 2, 4})
    for (double g0db : {0.0, 10.0, 20.0})
      for (double pf : {0.01, 0.1, 0.5}) {
        const double g0 = db_to_linear(g0db);
        const double lam = threshold_for_pfa(u, pf);
        CHECK(avg_pd_closed({u, lam}, from_rayleigh(g0)) ==
              Catch::Approx(oracles::rayleigh_pd_reference(u, lam, g0)).margin(1e-9));
      }
}

TEST_CASE("avg_pd ordering and monotonicity") {
  const MGDistribution d =
      normalize(MGDistribution({{0.6, 2.0, 1.3}, {0.4, 1.0, 0.6}}, 10.0));
  for (int u : {1, 2}) {
    double prev = 1.0;
    for (double lam : {0.5, 2.0, 5.0, 9.0, 14.0, 22.0, 30.0}) {
      const DetectorConfig cfg{u, lam};
      const double pd = avg_pd_closed(cfg, d);
      const double pf = prob_false_alarm(cfg);
      CHECK(pd <= 1.0);
      CHECK(pd > pf);  // strict when g0 > 0 and 0 < lambda < inf
      CHECK(pd < prev);
      prev = pd;
    }
  }
  // nondecreasing in mean SNR
  double prev = 0.0;
  for (double g0 : {1.0, 3.0, 10.0, 30.0, 100.0}) {
    const double pd = avg_pd_closed({2, 8.0}, from_rayleigh(g0));
    CHECK(pd >= prev);
    prev = pd;
  }
}

TEST_CASE("non-integer shapes route to the numeric path") {
  const MGDistribution frac = normalize(MGDistribution({{1.0, 2.5, 1.3}}, 8.0));
  CHECK_THROWS_AS(avg_pd_closed({2, 5.0}, frac), unsupported_error);
  const double pd = avg_pd_numeric({2, 5.0}, frac);
  CHECK(pd > prob_false_alarm({2, 5.0}));
  CHECK(pd < 1.0);
}

TEST_CASE("quadrature validates against Monte Carlo (1e7 trials)") {
  const MGDistribution ray = from_rayleigh(10.0);
  const double lam = threshold_for_pfa(2, 0.1);
  const double pd = avg_pd_numeric({2, lam}, ray);
  TrialPlan plan;
  plan.n_trials = 10000000;
  plan.seed = 90210;
  plan.cfg = {2, lam};
  plan.channel = ray;
  const TrialReport rep = run_trials(plan, Hypothesis::h1);
  CHECK(rep.ci_low <= pd);
  CHECK(pd <= rep.ci_high);
}
