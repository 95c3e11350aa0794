#include <doctest.h>

#include <cmath>
#include <complex>

#include "sphonic/rng.hpp"
#include "sphonic/sh.hpp"

using namespace sphonic;

namespace {

// Independent reference for the normalized Legendre functions: unnormalized
// Ferrers recurrence in long double, normalization applied through lgammal.
// Shares no code path (and no normalization mechanics) with the library.
long double reference_pbar(int n, int m, long double x) {
  long double pmm = 1.0L;
  if (m > 0) {
    const long double somx2 = sqrtl((1.0L - x) * (1.0L + x));
    long double f = 1.0L;
    for (int i = 0; i < m; ++i) {
      pmm *= -f * somx2;  // Condon-Shortley phase
      f += 2.0L;
    }
  }
  const long double four_pi = 4.0L * acosl(-1.0L);
  const long double scale =
      sqrtl((2.0L * n + 1.0L) / four_pi) *
      expl(0.5L * (lgammal(static_cast<long double>(n - m + 1)) -
                   lgammal(static_cast<long double>(n + m + 1))));
  if (n == m) return scale * pmm;
  long double pmmp1 = x * (2.0L * m + 1.0L) * pmm;
  if (n == m + 1) return scale * pmmp1;
  long double pll = 0.0L;
  for (int ll = m + 2; ll <= n; ++ll) {
    pll = ((2.0L * ll - 1.0L) * x * pmmp1 - (ll + m - 1.0L) * pmm) / (ll - m);
    pmm = pmmp1;
    pmmp1 = pll;
  }
  return scale * pll;
}

}  // namespace

TEST_CASE("acn index round trip and spot values") {
  CHECK(acn_index(0, 0) == 0);
  CHECK(acn_index(1, -1) == 1);
  CHECK(acn_index(1, 0) == 2);
  CHECK(acn_index(1, 1) == 3);
  CHECK(acn_index(4, -4) == 16);
  CHECK(acn_index(4, 4) == 24);
  CHECK(num_coeffs(4) == 25);
  for (int i = 0; i < 100; ++i) {
    const HarmonicIndex h = acn_unindex(i);
    CHECK(h.n >= 0);
    CHECK(std::abs(h.m) <= h.n);
    CHECK(acn_index(h.n, h.m) == i);
  }
  CHECK_THROWS_AS(acn_index(2, 3), DomainError);
  CHECK_THROWS_AS(acn_unindex(-1), DomainError);
}

TEST_CASE("direction validation and azimuth wrapping") {
  CHECK_THROWS_AS(Direction::of(-0.1, 0.0), DomainError);
  CHECK_THROWS_AS(Direction::of(kPi + 0.1, 0.0), DomainError);
  const Direction a = Direction::of(1.0, 2.0 * kPi + 0.25);
  CHECK(a.phi == doctest::Approx(0.25).epsilon(1e-12));
  const Direction b = Direction::of(1.0, -0.25);
  CHECK(b.phi == doctest::Approx(2.0 * kPi - 0.25).epsilon(1e-12));
}

TEST_CASE("normalized Legendre matches frozen high-precision values") {
  // constants computed with 30-digit arithmetic and frozen here
  CHECK(assoc_legendre_norm(0, 0, 0.3) ==
        doctest::Approx(0.282094791773878143474).epsilon(1e-14));
  CHECK(assoc_legendre_norm(1, 1, 0.5) ==
        doctest::Approx(-0.299206710301074508455).epsilon(1e-14));
  CHECK(assoc_legendre_norm(6, 3, 0.7) ==
        doctest::Approx(-0.3969105256843699513197).epsilon(1e-13));
  // n = 40 probes the recurrence where naive factorial scaling overflows
  CHECK(assoc_legendre_norm(40, 20, 0.3) ==
        doctest::Approx(-0.1105178623543542611612).epsilon(5e-13));
  CHECK(assoc_legendre_norm(40, 20, 0.7) ==
        doctest::Approx(0.2516872720910045094446).epsilon(5e-13));
  CHECK(assoc_legendre_norm(40, 20, -0.9) ==
        doctest::Approx(0.1269301327624551530524).epsilon(5e-13));
}

TEST_CASE("normalized Legendre matches the long-double reference everywhere") {
  const double xs[] = {-0.95, -0.5, -0.1, 0.0, 0.2, 0.6, 0.9, 1.0};
  for (int n = 0; n <= 12; ++n) {
    for (int m = 0; m <= n; ++m) {
      for (double x : xs) {
        const double got = assoc_legendre_norm(n, m, x);
        const double want = static_cast<double>(reference_pbar(n, m, x));
        CHECK(got == doctest::Approx(want).epsilon(1e-12));
      }
    }
  }
  CHECK_THROWS_AS(assoc_legendre_norm(2, 1, 1.5), DomainError);
  CHECK_THROWS_AS(assoc_legendre_norm(2, 3, 0.5), DomainError);
}

TEST_CASE("spherical harmonic closed forms and phase convention") {
  const double s14 = 0.282094791773878143474;   // sqrt(1/4pi)
  const double s34 = 0.4886025119029199215864;  // sqrt(3/4pi)
  const double s38 = 0.3454941494713354792652;  // sqrt(3/8pi)

  CHECK(sph_harm(0, 0, 1.1, 2.2).real() == doctest::Approx(s14).epsilon(1e-14));
  CHECK(sph_harm(0, 0, 1.1, 2.2).imag() == doctest::Approx(0.0));

  for (double theta : {0.3, 1.0, 2.5}) {
    const auto y10 = sph_harm(1, 0, theta, 0.7);
    CHECK(y10.real() == doctest::Approx(s34 * std::cos(theta)).epsilon(1e-13));
    CHECK(y10.imag() == doctest::Approx(0.0));
  }

  // Y_1^1 carries the Condon-Shortley minus sign
  for (double phi : {0.0, 0.9, 4.0}) {
    const auto y11 = sph_harm(1, 1, kPi / 2.0, phi);
    CHECK(y11.real() == doctest::Approx(-s38 * std::cos(phi)).epsilon(1e-13));
    CHECK(y11.imag() == doctest::Approx(-s38 * std::sin(phi)).epsilon(1e-13));
  }
}

TEST_CASE("conjugate symmetry for negative degrees") {
  Rng rng(11);
  for (int trial = 0; trial < 50; ++trial) {
    const int n = rng.uniform_int(0, 8);
    const int m = rng.uniform_int(0, n);
    const double theta = rng.uniform(0.0, kPi);
    const double phi = rng.uniform(0.0, 2.0 * kPi);
    const auto pos = sph_harm(n, m, theta, phi);
    const auto neg = sph_harm(n, -m, theta, phi);
    const double sign = m % 2 ? -1.0 : 1.0;
    const auto want = sign * std::conj(pos);
    CHECK(std::abs(neg - want) < 1e-13);
  }
}

TEST_CASE("addition theorem") {
  Rng rng(12);
  for (int trial = 0; trial < 20; ++trial) {
    const double theta = rng.uniform(0.0, kPi);
    const double phi = rng.uniform(0.0, 2.0 * kPi);
    for (int n = 0; n <= 6; ++n) {
      double sum = 0.0;
      for (int m = -n; m <= n; ++m) sum += std::norm(sph_harm(n, m, theta, phi));
      CHECK(sum == doctest::Approx((2.0 * n + 1.0) / kFourPi).epsilon(1e-12));
    }
  }
}

TEST_CASE("gauss-legendre nodes, weights, and exactness") {
  std::vector<double> x, w;
  gauss_legendre(5, &x, &w);
  REQUIRE(x.size() == 5);
  // textbook 5-point rule
  CHECK(x[0] == doctest::Approx(-0.9061798459386640).epsilon(1e-13));
  CHECK(x[1] == doctest::Approx(-0.5384693101056831).epsilon(1e-13));
  CHECK(x[2] == doctest::Approx(0.0));
  CHECK(w[2] == doctest::Approx(0.5688888888888889).epsilon(1e-13));
  CHECK(w[0] == doctest::Approx(0.2369268850561891).epsilon(1e-13));
  CHECK(w[1] == doctest::Approx(0.4786286704993665).epsilon(1e-13));

  for (int n : {1, 2, 3, 8, 16}) {
    gauss_legendre(n, &x, &w);
    double wsum = 0.0;
    for (double v : w) wsum += v;
    CHECK(wsum == doctest::Approx(2.0).epsilon(1e-13));
    // exact for monomials up to degree 2n - 1
    for (int k = 0; k <= 2 * n - 1; ++k) {
      double got = 0.0;
      for (std::size_t i = 0; i < x.size(); ++i) got += w[i] * std::pow(x[i], k);
      const double want = k % 2 ? 0.0 : 2.0 / (k + 1);
      CHECK(got == doctest::Approx(want).epsilon(1e-11));
    }
  }
  CHECK_THROWS_AS(gauss_legendre(0, &x, &w), DomainError);
}

TEST_CASE("gauss-uniform grid integrates the basis orthonormally") {
  const QuadratureGrid grid = gauss_uniform_grid(9, 19);
  CHECK(grid.degree == 17);
  double wsum = 0.0;
  for (double v : grid.weights) wsum += v;
  CHECK(wsum == doctest::Approx(kFourPi).epsilon(1e-13));

  const int nc = num_coeffs(4);
  for (int a = 0; a < nc; ++a) {
    for (int b = 0; b < nc; ++b) {
      std::complex<double> acc = 0.0;
      for (std::size_t j = 0; j < grid.nodes.size(); ++j) {
        acc += grid.weights[j] * sph_harm(acn_unindex(a), grid.nodes[j]) *
               std::conj(sph_harm(acn_unindex(b), grid.nodes[j]));
      }
      const double want = a == b ? 1.0 : 0.0;
      CHECK(std::abs(acc - std::complex<double>(want)) < 1e-12);
    }
  }
}

TEST_CASE("bundled spherical designs are equal weight and exact to degree t") {
  for (int t : {4, 6, 8, 10}) {
    const QuadratureGrid grid = spherical_design_grid(t);
    REQUIRE(!grid.nodes.empty());
    CHECK(grid.degree == t);
    const double w0 = grid.weights.front();
    double wsum = 0.0;
    for (double v : grid.weights) {
      CHECK(v == doctest::Approx(w0).epsilon(1e-15));
      wsum += v;
    }
    CHECK(wsum == doctest::Approx(kFourPi).epsilon(1e-12));

    // Weyl sums: integral of Y_n^m vanishes for 1 <= n <= t
    for (int n = 0; n <= t; ++n) {
      for (int m = -n; m <= n; ++m) {
        std::complex<double> acc = 0.0;
        for (std::size_t j = 0; j < grid.nodes.size(); ++j) {
          acc += grid.weights[j] * sph_harm(n, m, grid.nodes[j].theta, grid.nodes[j].phi);
        }
        const double want = n == 0 ? std::sqrt(kFourPi) : 0.0;
        CHECK(std::abs(acc - std::complex<double>(want)) < 1e-10);
      }
    }
  }
  CHECK_THROWS_AS(spherical_design_grid(5), ConfigError);
  CHECK_THROWS_AS(spherical_design_grid(12), ConfigError);
}

TEST_CASE("continuous analysis recovers a synthesized band-limited field") {
  Rng rng(21);
  const int order = 3;
  std::vector<std::complex<double>> truth(num_coeffs(order));
  for (auto& c : truth) c = rng.gaussian_complex();

  const auto field = [&](const Direction& dir) {
    std::complex<double> acc = 0.0;
    for (int i = 0; i < num_coeffs(order); ++i) acc += truth[i] * sph_harm(acn_unindex(i), dir);
    return acc;
  };

  const ShAnalysis res = sh_analyze_continuous(field, gauss_uniform_grid(7, 15), order);
  CHECK(!res.degree_warning);
  REQUIRE(res.coeffs.size() == truth.size());
  for (std::size_t i = 0; i < truth.size(); ++i) CHECK(std::abs(res.coeffs[i] - truth[i]) < 1e-12);

  // under-resolved grid flags the degree warning
  const ShAnalysis low = sh_analyze_continuous(field, gauss_uniform_grid(3, 7), 3);
  CHECK(low.degree_warning);
}
