#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <sstream>

#include "meso/error.hpp"
#include "meso/semicircle.hpp"
#include "oracles.hpp"

using namespace meso;
using C = std::complex<double>;

TEST_CASE("density") {
  CHECK(sc_density(0.0) == doctest::Approx(std::sqrt(2.0) / M_PI).epsilon(1e-14));
  CHECK(sc_density(kEdge) == 0.0);
  CHECK(sc_density(2.0) == 0.0);
  CHECK(oracle::simpson(sc_density, -kEdge, kEdge, 200000) == doctest::Approx(1.0).epsilon(1e-7));
}

TEST_CASE("cdf and quantile") {
  CHECK(sc_quantile(0.5) == doctest::Approx(0.0).scale(1e-14));
  CHECK(sc_quantile(1 - 1e-12) == doctest::Approx(kEdge).epsilon(1e-4));
  double v = sc_quantile(0.25);
  CHECK(sc_cdf(v) == doctest::Approx(0.25).epsilon(1e-10));
  // cdf against the integrated density
  for (double x : {-1.2, -0.4, 0.3, 1.0})
    CHECK(sc_cdf(x) == doctest::Approx(oracle::simpson(sc_density, -kEdge, x, 200000)).epsilon(1e-7));
  for (double x = -1.4; x < 1.4; x += 0.05) CHECK(sc_quantile(sc_cdf(x)) == doctest::Approx(x).epsilon(1e-10));
  CHECK_THROWS_AS(sc_quantile(0.0), Error);
  CHECK_THROWS_AS(sc_quantile(1.0), Error);
}

TEST_CASE("quantile configurations") {
  CHECK(quantile_configuration(1).points == std::vector<double>{0.0});
  auto c2 = quantile_configuration(2);
  CHECK(c2.points[0] == doctest::Approx(-c2.points[1]));
  CHECK(kolmogorov_distance_sc(quantile_configuration(1000)) <= 5e-4 + 1e-12);
  auto c = quantile_configuration(257);
  CHECK(std::is_sorted(c.points.begin(), c.points.end()));
  CHECK(kolmogorov_distance_sc(c) <= 1.0 / (2 * 257) + 1e-12);
}

TEST_CASE("iid sampling") {
  auto a = sample_iid(100000, 7);
  double mean = 0, mx = -10;
  for (double x : a.points) {
    mean += x;
    mx = std::max(mx, x);
  }
  mean /= a.n();
  CHECK(std::abs(mean) <= 3 * std::sqrt(0.5 / 1e5));
  CHECK(mx <= kEdge);
  CHECK(std::is_sorted(a.points.begin(), a.points.end()));
  CHECK(sample_iid(100, 3).points == sample_iid(100, 3).points);
  CHECK(sample_iid(100, 3, 0).points != sample_iid(100, 3, 1).points);
}

TEST_CASE("iid histogram chi-square") {
  // 30 equal-probability bins; chi2 critical value at 1% for 29 dof is 49.59
  int fails = 0;
  for (int s = 0; s < 20; ++s) {
    auto a = sample_iid(100000, 100 + s);
    std::vector<int> counts(30, 0);
    for (double x : a.points) counts[std::min(29, static_cast<int>(sc_cdf(x) * 30))]++;
    double chi2 = 0, e = 1e5 / 30;
    for (int c : counts) chi2 += (c - e) * (c - e) / e;
    fails += chi2 > 49.59;
  }
  CHECK(fails <= 1);
}

TEST_CASE("stieltjes transform") {
  CHECK(std::abs(stieltjes_u(C(2.0, 0)) - C(2 - std::sqrt(2.0), 0)) < 1e-14);
  CHECK(std::abs(stieltjes_u(C(0, 1)) - C(0, -(std::sqrt(3.0) - 1))) < 1e-14);
  C z = std::polar(100.0, 0.7);
  CHECK(std::abs(stieltjes_u(z) * z - 1.0) < 1e-3);
  // against the Cauchy integral computed by Simpson in x = sqrt2 sin(theta)
  for (C w : {C(0.3, 0.5), C(-1.0, 0.2), C(1.7, 0.01), C(0.0, -0.8), C(-2.5, 0.0), C(0.9, -1.5)}) {
    auto re = oracle::simpson([&](double th) {
      return (2 * std::cos(th) * std::cos(th) / (w - kEdge * std::sin(th))).real(); }, -M_PI / 2, M_PI / 2, 40000);
    auto im = oracle::simpson([&](double th) {
      return (2 * std::cos(th) * std::cos(th) / (w - kEdge * std::sin(th))).imag(); }, -M_PI / 2, M_PI / 2, 40000);
    CHECK(std::abs(stieltjes_u(w) - C(re, im) / M_PI) < 1e-8);
  }
}

TEST_CASE("herglotz property and derivative") {
  for (double a = -3; a <= 3; a += 0.5)
    for (double b : {1e-3, 0.1, 1.0, 5.0}) {
      CHECK(stieltjes_u(C(a, b)).imag() < 0);
      C z(a, b), h(1e-6, 0);
      C fd = (stieltjes_u(z + h) - stieltjes_u(z - h)) / (2.0 * h);
      CHECK(std::abs(stieltjes_u_prime(z) - fd) < 1e-6 * (1 + std::abs(fd)));
    }
}

TEST_CASE("configuration csv round trip") {
  auto c = sample_iid(50, 11);
  std::stringstream ss;
  write_configuration_csv(ss, c);
  auto r = read_configuration_csv(ss);
  CHECK(r.points == c.points);
  CHECK_THROWS_AS(make_configuration({1.0, std::nan("")}), Error);
}
