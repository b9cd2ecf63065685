#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "mgsense/quadrature.hpp"
#include "mgsense/rng.hpp"

using namespace mgsense;

TEST_CASE("adaptive quadrature on known integrals") {
  CHECK(integrate([](double x) { return std::sin(x); }, 0.0, M_PI, 1e-12) ==
        Catch::Approx(2.0).epsilon(1e-12));
  CHECK(integrate([](double x) { return std::exp(-x); }, 0.0, 50.0, 1e-12) ==
        Catch::Approx(1.0).epsilon(1e-12));
  // mildly oscillatory
  CHECK(integrate([](double x) { return std::cos(10.0 * x); }, 0.0, 1.0, 1e-12) ==
        Catch::Approx(std::sin(10.0) / 10.0).margin(1e-12));
  // peaked
  const double v = integrate([](double x) { return std::exp(-100.0 * (x - 0.7) * (x - 0.7)); },
                             0.0, 2.0, 1e-13);
  CHECK(v == Catch::Approx(std::sqrt(M_PI) / 10.0).epsilon(1e-11));
}

TEST_CASE("quadrature reports non-convergence") {
  // |x - pi/8|^{-1/2} has an interior integrable singularity that exhausts a
  // tiny interval budget
  auto f = [](double x) { return 1.0 / std::sqrt(std::fabs(x - M_PI / 8.0)); };
  CHECK_THROWS_AS(integrate(f, 0.0, 1.0, 1e-14, 0.0, 8), accuracy_error);
}

TEST_CASE("gauss_hermite integrates polynomials and gaussians exactly") {
  std::vector<double> x, w;
  gauss_hermite(15, x, w);
  double total = 0.0, second = 0.0, exp_int = 0.0;
  for (int i = 0; i < 15; ++i) {
    total += w[i];
    second += w[i] * x[i] * x[i];
    exp_int += w[i] * std::exp(x[i]);
  }
  CHECK(total == Catch::Approx(std::sqrt(M_PI)).epsilon(1e-13));
  CHECK(second == Catch::Approx(0.5 * std::sqrt(M_PI)).epsilon(1e-12));
  // int e^{-t^2 + t} dt = sqrt(pi) e^{1/4}
  CHECK(exp_int == Catch::Approx(std::sqrt(M_PI) * std::exp(0.25)).epsilon(1e-12));
}

TEST_CASE("philox known-answer vectors") {
  std::uint32_t out[4];
  const std::uint32_t zeros[4] = {0, 0, 0, 0};
  const std::uint32_t zkey[2] = {0, 0};
  detail::philox4x32_10(zeros, zkey, out);
  CHECK(out[0] == 0x6627e8d5u);
  CHECK(out[1] == 0xe169c58du);
  CHECK(out[2] == 0xbc57ac4cu);
  CHECK(out[3] == 0x9b00dbd8u);

  const std::uint32_t ones[4] = {0xffffffffu, 0xffffffffu, 0xffffffffu, 0xffffffffu};
  const std::uint32_t okey[2] = {0xffffffffu, 0xffffffffu};
  detail::philox4x32_10(ones, okey, out);
  CHECK(out[0] == 0x408f276du);
  CHECK(out[1] == 0x41c83b0eu);
  CHECK(out[2] == 0xa20bc7c6u);
  CHECK(out[3] == 0x6d5451fdu);

  const std::uint32_t pic[4] = {0x243f6a88u, 0x85a308d3u, 0x13198a2eu, 0x03707344u};
  const std::uint32_t pik[2] = {0xa4093822u, 0x299f31d0u};
  detail::philox4x32_10(pic, pik, out);
  CHECK(out[0] == 0xd16cfe09u);
  CHECK(out[1] == 0x94fdccebu);
  CHECK(out[2] == 0x5001e420u);
  CHECK(out[3] == 0x24126ea1u);
}

TEST_CASE("philox streams are deterministic and distinct") {
  Philox a(42, 7), b(42, 7), c(42, 8);
  for (int i = 0; i < 100; ++i) {
    const auto va = a.next_u64();
    CHECK(va == b.next_u64());
    CHECK(va != c.next_u64());
  }
}

TEST_CASE("sampler moments") {
  Philox rng(2024, 0);
  const int n = 200000;
  double sum = 0.0, sq = 0.0;
  for (int i = 0; i < n; ++i) {
    const double v = rng.normal();
    sum += v;
    sq += v * v;
  }
  CHECK(sum / n == Catch::Approx(0.0).margin(4.0 / std::sqrt(static_cast<double>(n))));
  CHECK(sq / n == Catch::Approx(1.0).margin(6.0 / std::sqrt(static_cast<double>(n))));

  double gsum = 0.0, gsq = 0.0;
  for (int i = 0; i < n; ++i) {
    const double v = rng.gamma_int(4);
    gsum += v;
    gsq += v * v;
  }
  const double mean = gsum / n;
  CHECK(mean == Catch::Approx(4.0).margin(4.0 * 2.0 / std::sqrt(static_cast<double>(n))));
  CHECK(gsq / n - mean * mean ==
        Catch::Approx(4.0).margin(6.0 * 4.0 / std::sqrt(static_cast<double>(n))));

  // uniform stays in (0, 1]
  for (int i = 0; i < 1000; ++i) {
    const double u = rng.uniform();
    CHECK(u > 0.0);
    CHECK(u <= 1.0);
  }
}
