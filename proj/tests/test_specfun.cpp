#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "mgsense/specfun.hpp"
#include "oracles.hpp"

using namespace mgsense;

TEST_CASE("ln_gamma matches reference values") {
  CHECK(ln_gamma(1.0) == Catch::Approx(0.0).margin(1e-14));
  CHECK(ln_gamma(5.0) == Catch::Approx(std::log(24.0)).epsilon(1e-14));
  CHECK(ln_gamma(0.5) == Catch::Approx(0.5723649429247000871).epsilon(1e-14));
  CHECK(ln_gamma(2.5) == Catch::Approx(0.2846828704729191596).epsilon(1e-13));
  CHECK(ln_gamma(1234.5) == Catch::Approx(7550.550901077894896).epsilon(1e-14));
  CHECK(ln_gamma(0.001) == Catch::Approx(6.907178885383853683).epsilon(1e-14));
  CHECK_THROWS_AS(ln_gamma(0.0), domain_error);
  CHECK_THROWS_AS(ln_gamma(-3.0), domain_error);
  CHECK_THROWS_AS(ln_gamma(std::numeric_limits<double>::quiet_NaN()), domain_error);
}

TEST_CASE("incomplete gamma identities and examples") {
  CHECK(upper_gamma_reg(1.0, 2.0) == Catch::Approx(std::exp(-2.0)).epsilon(1e-13));
  CHECK(upper_gamma_reg(3.0, 0.0) == 1.0);
  CHECK(upper_gamma_reg(2.0, 3.0) == Catch::Approx(4.0 * std::exp(-3.0)).epsilon(1e-13));
  CHECK(lower_gamma_reg(2.0, 0.0) == 0.0);
  CHECK(lower_gamma_reg(1.0, 1.0) == Catch::Approx(1.0 - std::exp(-1.0)).epsilon(1e-13));
  // frozen independent values
  CHECK(lower_gamma_reg(2.5, 1.7) == Catch::Approx(0.3614300768962049234).epsilon(1e-12));
  CHECK(upper_gamma_reg(0.5, 0.25) == Catch::Approx(0.4795001221869534623).epsilon(1e-12));
  CHECK(upper_gamma_reg(3.5, 7.2) == Catch::Approx(0.04450749951455073870).epsilon(1e-12));
  CHECK(upper_gamma_reg(10.0, 3.0) == Catch::Approx(0.9988975118698845203).epsilon(1e-12));
  CHECK(upper_gamma_reg(7.0, 20.0) == Catch::Approx(2.551224958563007329e-4).epsilon(1e-12));
  CHECK_THROWS_AS(upper_gamma_reg(-1.0, 2.0), domain_error);
  CHECK_THROWS_AS(lower_gamma_reg(1.0, -2.0), domain_error);
}

TEST_CASE("incomplete gamma vs quadrature oracle") {
  // gamma(a,x)/Gamma(a) against adaptive-Simpson integration; for a < 1 the
  // substitution u = t^a removes the endpoint singularity of t^{a-1}.
  std::mt19937_64 gen(7);
  std::uniform_real_distribution<double> ad(0.3, 12.0), xd(0.0, 30.0);
  for (int i = 0; i < 60; ++i) {
    const double a = ad(gen), x = xd(gen);
    const double lg = std::lgamma(a);
    double ref;
    if (a < 1.0) {
      ref = oracles::adaptive_simpson(
                [&](double u) { return u > 0 ? std::exp(-std::pow(u, 1.0 / a)) : 1.0; },
                0.0, std::pow(x, a), 1e-14) /
            (a * std::exp(lg));
    } else {
      ref = oracles::adaptive_simpson(
          [&](double t) {
            return t > 0 ? std::exp((a - 1.0) * std::log(t) - t - lg) : 0.0;
          },
          0.0, x, 1e-13);
    }
    CHECK(lower_gamma_reg(a, x) == Catch::Approx(ref).margin(1e-10).epsilon(1e-10));
  }
}

TEST_CASE("complementarity P + Q = 1") {
  for (double a = 0.5; a <= 10.0; a += 0.5)
    for (double x : {0.0, 0.1, 0.7, 2.0, 5.0, 9.5, 17.0, 33.0, 50.0})
      CHECK(upper_gamma_reg(a, x) + lower_gamma_reg(a, x) ==
            Catch::Approx(1.0).margin(1e-12));
}

TEST_CASE("marcum_q reductions and frozen values") {
  CHECK(marcum_q(2, 1.5, 0.0) == 1.0);
  CHECK(marcum_q(3, 0.0, 2.0) == Catch::Approx(5.0 * std::exp(-2.0)).epsilon(1e-13));
  CHECK(marcum_q(3, 0.0, 2.0) == Catch::Approx(upper_gamma_reg(3, 2.0)).margin(1e-15));
  // frozen series-oracle values
  CHECK(marcum_q(1, 1.0, 2.0) == Catch::Approx(0.2690120600359099967).epsilon(1e-12));
  CHECK(marcum_q(2, 0.5, 1.5) == Catch::Approx(0.7145872896399203516).epsilon(1e-12));
  CHECK(marcum_q(4, 3.0, 5.0) == Catch::Approx(0.1351119434818511262).epsilon(1e-12));
  CHECK(marcum_q(3, 2.2, 0.8) == Catch::Approx(0.9995385303060215452).epsilon(1e-12));
  CHECK(marcum_q(6, 7.0, 9.0) == Catch::Approx(0.09545304051643358199).epsilon(1e-12));
  CHECK(marcum_q(2, 12.0, 10.0) == Catch::Approx(0.9836987256056194288).epsilon(1e-12));
  CHECK_THROWS_AS(marcum_q(0, 1.0, 1.0), unsupported_error);
  CHECK_THROWS_AS(marcum_q(2, -1.0, 1.0), domain_error);
}

TEST_CASE("marcum_q vs series oracle on random points") {
  std::mt19937_64 gen(11);
  std::uniform_int_distribution<int> ud(1, 8);
  std::uniform_real_distribution<double> ab(0.0, 9.0);
  for (int i = 0; i < 200; ++i) {
    const int u = ud(gen);
    const double a = ab(gen), b = ab(gen);
    const double ref = oracles::marcum_series(u, a, b);
    CHECK(marcum_q(u, a, b) == Catch::Approx(ref).margin(1e-12).epsilon(1e-10));
  }
}

TEST_CASE("marcum_q monotonicity") {
  // nonincreasing in b, nondecreasing in a and u
  // tolerance reflects the policy's 1e-12 truncation bound
  for (int u : {1, 2, 4})
    for (double a : {0.0, 0.8, 2.0, 4.5})
      for (double b : {0.2, 1.0, 2.5, 5.0}) {
        const double q = marcum_q(u, a, b);
        CHECK(marcum_q(u, a, b + 0.3) <= q + 5e-12);
        CHECK(marcum_q(u, a + 0.3, b) >= q - 5e-12);
        CHECK(marcum_q(u + 1, a, b) >= q - 5e-12);
      }
}

TEST_CASE("kummer_1f1 identities and frozen values") {
  CHECK(kummer_1f1(2, 3, 0.0) == 1.0);
  CHECK(kummer_1f1(0, 4, 3.2) == 1.0);
  CHECK(kummer_1f1(1, 1, 1.3) == Catch::Approx(std::exp(1.3)).epsilon(1e-12));
  CHECK(kummer_1f1(2, 3, 0.7) == Catch::Approx(1.615813011260640994).epsilon(1e-12));
  CHECK(kummer_1f1(3, 5, 2.25) == Catch::Approx(4.246043935248836910).epsilon(1e-12));
  CHECK(kummer_1f1(5, 3, 0.5) == Catch::Approx(2.232643387406423532).epsilon(1e-12));
  CHECK(kummer_1f1(2, 7, 31.0) == Catch::Approx(612723617.2775017824).epsilon(1e-11));
  CHECK(kummer_1f1(4, 4, -3.0) == Catch::Approx(0.04978706836786394298).epsilon(1e-12));
  CHECK_THROWS_AS(kummer_1f1(-1, 2, 1.0), domain_error);
  CHECK_THROWS_AS(kummer_1f1(2, 0, 1.0), domain_error);
  CHECK_THROWS_AS(kummer_1f1(3, 2, 800.0), mgsense::range_error);
}

TEST_CASE("kummer_1f1 with a = b equals exp(z)") {
  for (double z = -10.0; z <= 30.0; z += 2.5)
    for (int a : {1, 2, 5})
      CHECK(kummer_1f1(a, a, z) == Catch::Approx(std::exp(z)).epsilon(1e-12));
}

TEST_CASE("kummer_1f1 vs direct series oracle") {
  std::mt19937_64 gen(13);
  std::uniform_int_distribution<int> ad(0, 9), bd(1, 9);
  std::uniform_real_distribution<double> zd(0.0, 40.0);
  for (int i = 0; i < 200; ++i) {
    const int a = ad(gen), b = bd(gen);
    const double z = zd(gen);
    CHECK(kummer_1f1(a, b, z) ==
          Catch::Approx(oracles::kummer_series(a, b, z)).epsilon(1e-10));
  }
}

TEST_CASE("accuracy policy validation") {
  CHECK_NOTHROW(AccuracyPolicy{1e-12, 10000}.check());
  CHECK_THROWS_AS((AccuracyPolicy{1e-2, 10000}.check()), domain_error);
  CHECK_THROWS_AS((AccuracyPolicy{0.0, 10000}.check()), domain_error);
  CHECK_THROWS_AS((AccuracyPolicy{1e-12, 50}.check()), domain_error);
}

TEST_CASE("binom small-argument exactness") {
  CHECK(binom(5, 2) == 10.0);
  CHECK(binom(0, 0) == 1.0);
  CHECK(binom(12, 7) == 792.0);
  CHECK(binom(4, 5) == 0.0);
}
