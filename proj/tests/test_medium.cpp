#include <cmath>

#include "doctest.h"
#include "rte/error.hpp"
#include "rte/medium.hpp"

using namespace rte;

TEST_CASE("zero polynomial coefficients give the constant 4") {
  ProductPolynomial p;
  p.cx = {0, 0, 0};
  p.cy = {0, 0, 0};
  for (double x : {0.0, 0.3, 1.0})
    for (double y : {0.0, 0.7, 1.0}) CHECK(p(x, y) == 4.0);
}

TEST_CASE("diffusion epsilon follows 0.01 (c + 0.1)") {
  MediumField f = sample_medium(Regime::Diffusion, 2, 7);
  f.eps_param = 0.0;
  CHECK(f.epsilon(0.4, 0.6) == doctest::Approx(0.001).epsilon(1e-14));
  f.eps_param = 1.0;
  CHECK(f.epsilon(0.4, 0.6) == doctest::Approx(0.011).epsilon(1e-14));
}

TEST_CASE("sampled media keep sigma_T - sigma_a >= 0.2") {
  for (const char* tag : {"diffusion", "transport", "interface-1", "interface-3", "interface-5", "interface-6"})
    for (int degree = 1; degree <= 4; ++degree)
      for (std::uint64_t seed : {0ull, 1ull, 99ull}) {
        const MediumField f = sample_medium(parse_regime(tag), degree, seed);
        double lowest = 1e300;
        for (int a = 0; a < 256; ++a)
          for (int b = 0; b < 256; ++b) {
            const double x = a / 255.0, y = b / 255.0;
            lowest = std::min(lowest, f.sigma_t(x, y) - f.sigma_a(x, y));
            const double e = f.epsilon(x, y);
            REQUIRE(e > 0.0);
            REQUIRE(e <= 1.0);
            REQUIRE(f.sigma_a(x, y) >= 0.0);
          }
        CHECK(lowest >= 0.2 - 1e-9);
        CHECK(min_scattering_margin(f) >= 0.2 - 1e-9);
      }
}

TEST_CASE("interface regimes place the diffusive region as tagged") {
  const MediumField f = sample_medium(Regime::InterfaceLeftRight, 1, 3);
  CHECK(f.epsilon(0.2, 0.5) < 0.02);
  CHECK(f.epsilon(0.8, 0.5) == 1.0);
  const MediumField g = sample_medium(Regime::InterfaceCenterIn, 1, 3);
  CHECK(g.epsilon(0.5, 0.5) < 0.02);
  CHECK(g.epsilon(0.05, 0.05) == 1.0);
}

TEST_CASE("regime tags round-trip and unknown tags are rejected") {
  for (const char* tag : {"diffusion", "transport", "interface-1", "interface-2", "interface-3", "interface-4",
                          "interface-5", "interface-6"})
    CHECK(regime_tag(parse_regime(tag)) == tag);
  CHECK_THROWS_AS(parse_regime("plasma"), ConfigError);
}

TEST_CASE("cell averages of a constant medium are exact") {
  const MediumField f = constant_medium(3.0, 0.5, 0.25, 2.0);
  for (const auto& c : cell_average(f, 4)) {
    CHECK(c.sigma_t == doctest::Approx(3.0).epsilon(1e-15));
    CHECK(c.sigma_a == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(c.eps == doctest::Approx(0.25).epsilon(1e-15));
    CHECK(c.eff_total > c.eff_scatter);
    CHECK(c.gamma >= 0.0);
    CHECK(c.gamma < 1.0);
    CHECK(c.rho == doctest::Approx(1.0 - c.gamma).epsilon(1e-12));
  }
}

TEST_CASE("affine product factors average to the midpoint value") {
  MediumField f = constant_medium(1.0, 0.1, 1.0);
  f.sigma_t.cx = {0.7};
  f.sigma_t.cy = {-0.4};
  f.sigma_t.shift = 1.0;
  const int I = 8;
  const auto avg = cell_average(f, I);
  for (int c = 0; c < I * I; ++c) {
    const double x = (c % I + 0.5) / I, y = (c / I + 0.5) / I;
    CHECK(avg[c].sigma_t == doctest::Approx(f.sigma_t(x, y)).epsilon(1e-13));
  }
}

TEST_CASE("degree-4 averages match a brute-force Riemann sum") {
  const MediumField f = sample_medium(Regime::Diffusion, 4, 17);
  const int I = 4;
  const auto avg = cell_average(f, I);
  // Midpoint sums on 64 and 32 points per axis, Richardson-combined to remove the h^2 term.
  auto riemann = [&](const ProductPolynomial& p, int c, int n) {
    const double x0 = double(c % I) / I, y0 = double(c / I) / I, h = 1.0 / I;
    double s = 0;
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b) s += p(x0 + (a + 0.5) * h / n, y0 + (b + 0.5) * h / n);
    return s / (double(n) * n);
  };
  for (int c = 0; c < I * I; ++c) {
    const double st = (4 * riemann(f.sigma_t, c, 64) - riemann(f.sigma_t, c, 32)) / 3;
    const double sa = (4 * riemann(f.sigma_a, c, 64) - riemann(f.sigma_a, c, 32)) / 3;
    CHECK(std::abs(avg[c].sigma_t - st) < 1e-6);
    CHECK(std::abs(avg[c].sigma_a - sa) < 1e-6);
    CHECK(std::abs(avg[c].sigma_t - riemann(f.sigma_t, c, 64)) < 1e-4);
  }
}

TEST_CASE("cells without absorption are rejected") {
  CHECK_THROWS_AS(make_cell_coefficients(2.0, 0.0, 0.5, 1.0), ConfigError);
}
