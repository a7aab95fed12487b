#include <doctest.h>

#include <cmath>
#include <fstream>

#include "meso/error.hpp"
#include "meso/testfn.hpp"
#include "oracles.hpp"

using namespace meso;

TEST_CASE("moments of the built-in bumps") {
  // exact: int (1-u^2)^2 = 16/15, int u^2 (1-u^2)^2 = 16/105
  CHECK(std::abs(moment(odd_bump(), 0)) < 1e-12);
  CHECK(moment(odd_bump(), 1) == doctest::Approx(16.0 / 105.0).epsilon(1e-10));
  CHECK(moment(bump(), 0) == doctest::Approx(16.0 / 15.0).epsilon(1e-10));
  CHECK(moment(bump(), 2) == doctest::Approx(oracle::simpson([](double u) { return u * u * std::pow(1 - u * u, 2); }, -1, 1)).epsilon(1e-9));
}

TEST_CASE("moment of a slowly decaying function is rejected") {
  CHECK_THROWS_AS(moment(cauchy(), 1), Error);
  try {
    moment(cauchy(), 2);
  } catch (const Error& e) {
    CHECK(e.code() == Errc::divergent_integral);
  }
}

TEST_CASE("fourier transform values") {
  CHECK(std::abs(fourier_at(cauchy(), 0.0) - std::sqrt(M_PI / 2)) < 1e-9);
  for (double w : {0.5, 1.0, 3.0})
    CHECK(std::abs(fourier_at(cauchy(), w) - std::sqrt(M_PI / 2) * std::exp(-w)) < 1e-9);
  CHECK(std::abs(fourier_at(odd_bump(), 0.0)) < 1e-12);
  // f real: fhat(-w) = conj fhat(w)
  for (double w : {0.3, 2.0, 7.5}) {
    auto a = fourier_at(odd_bump(), w), b = fourier_at(odd_bump(), -w);
    CHECK(std::abs(a - std::conj(b)) < 1e-10);
  }
}

TEST_CASE("moment-derivative identity mu_1 = sqrt(2pi) i fhat'(0)") {
  const double h = 1e-4;
  auto d = (fourier_at(odd_bump(), h) - fourier_at(odd_bump(), -h)) / (2 * h);
  auto mu1 = std::sqrt(2 * M_PI) * std::complex<double>(0, 1) * d;
  CHECK(mu1.real() == doctest::Approx(16.0 / 105.0).epsilon(1e-6));
  CHECK(std::abs(mu1.imag()) < 1e-8);
}

TEST_CASE("fourier grid carries the requested frequencies") {
  GridFunction g = fourier_transform(cauchy(), {-2.0, 2.0, 0.5});
  REQUIRE(g.size() == 9);
  for (std::size_t i = 0; i < g.size(); ++i)
    CHECK(std::abs(g.values[i] - std::sqrt(M_PI / 2) * std::exp(-std::abs(g.point(i)))) < 1e-9);
  CHECK_THROWS_AS(fourier_transform(cauchy(), {0.0, 1.0, 0.0}), Error);
}

TEST_CASE("poisson smoothing") {
  // P_a * P_b = P_{a+b}: P_tau f_c(x) = (1+tau)/(x^2+(1+tau)^2)
  TestFunction p = poisson_smooth(cauchy(), 1.0);
  CHECK(p(0.0) == doctest::Approx(0.5).epsilon(1e-8));
  for (double x : {-2.0, 0.7, 3.0}) CHECK(p(x) == doctest::Approx(2.0 / (x * x + 4.0)).epsilon(1e-8));
  CHECK(!p.support_hint);
  CHECK(l2_norm_sq(p) == doctest::Approx(M_PI / 4).epsilon(1e-8));
  CHECK_THROWS_AS(poisson_smooth(cauchy(), 0.0), Error);
  CHECK_THROWS_AS(poisson_smooth(cauchy(), -1.0), Error);
}

TEST_CASE("poisson smoothing is an approximate identity") {
  TestFunction f = bump();
  double prev = 1e9;
  for (double tau : {1e-1, 1e-2, 1e-3}) {
    double err = std::abs(poisson_smooth(f, tau)(0.3) - f(0.3));
    CHECK(err < prev);
    prev = err;
  }
  CHECK(prev < 1e-2);
}

TEST_CASE("poisson semigroup") {
  TestFunction a = poisson_smooth(poisson_smooth(bump(), 0.3), 0.5);
  TestFunction b = poisson_smooth(bump(), 0.8);
  for (double x : {-1.5, -0.2, 0.0, 0.9, 2.5}) CHECK(std::abs(a(x) - b(x)) < 1e-6);
}

TEST_CASE("l2 norms") {
  CHECK(l2_norm_sq(cauchy()) == doctest::Approx(M_PI / 2).epsilon(1e-10));
  CHECK(l2_norm_sq(bump()) == doctest::Approx(256.0 / 315.0).epsilon(1e-10));
  CHECK(l2_norm_sq(rescaled(bump(), 2.0)) == doctest::Approx(128.0 / 315.0).epsilon(1e-10));
  CHECK(l2_norm_sq(constant_function(0.0)) == 0.0);
}

TEST_CASE("plancherel") {
  for (auto f : {bump(), odd_bump(), cauchy()}) {
    double lhs = l2_norm_sq(f);
    double rhs = spectral_integral(f, [](double) { return 1.0; });
    CHECK(rhs == doctest::Approx(lhs).epsilon(1e-5));
  }
}

TEST_CASE("poisson smoothing norm decreases in tau") {
  double prev = l2_norm_sq(bump());
  for (double tau : {0.1, 0.5, 1.0, 4.0}) {
    double v = l2_norm_sq(poisson_smooth(bump(), tau));
    CHECK(v < prev);
    prev = v;
  }
}

TEST_CASE("large-tau law of the smoothed norm") {
  // tau^{2p+1} ||P_tau f||^2 -> |fhat^(p)(0)|^2 (2p)!/(4^p (p!)^2), |fhat^(p)(0)|^2 = mu_p^2 / (2 pi)
  const double tau = 50.0;
  double mu0 = 16.0 / 15.0;
  CHECK(tau * l2_norm_sq(poisson_smooth(bump(), tau)) == doctest::Approx(mu0 * mu0 / (2 * M_PI)).epsilon(0.05));
  double mu1 = 16.0 / 105.0;
  double lim1 = mu1 * mu1 / (2 * M_PI) * 2.0 / 4.0;
  CHECK(std::pow(tau, 3) * spectral_integral(odd_bump(), [tau](double w) { return std::exp(-2 * tau * w); }) ==
        doctest::Approx(lim1).epsilon(0.05));
}

TEST_CASE("sobolev seminorm") {
  CHECK(sobolev_half_seminorm_sq(cauchy()) == doctest::Approx(M_PI * M_PI / 2).epsilon(1e-8));
  CHECK(sobolev_half_seminorm_sq(constant_function(3.0)) == doctest::Approx(0.0).scale(1e-12));
  // (2 pi) int |fhat|^2 |w| dw equals the real-space double integral
  double fourier = 2 * M_PI * spectral_integral(bump(), [](double w) { return w; });
  CHECK(sobolev_half_seminorm_sq(bump()) == doctest::Approx(fourier).epsilon(1e-6));
}

TEST_CASE("weighted lipschitz norm") {
  CHECK(weighted_lipschitz_norm(constant_function(2.0)) == 0.0);
  PairGridSpec coarse;
  PairGridSpec fine = coarse;
  fine.points = 2 * coarse.points - 1;
  double a = weighted_lipschitz_norm(cauchy(), coarse), b = weighted_lipschitz_norm(cauchy(), fine);
  CHECK(std::isfinite(a));
  CHECK(std::abs(a - b) / b < 0.02);
  auto id = make_test_function("id", [](double u) { return u; }, [](double) { return 1.0; });
  PairGridSpec wide = coarse;
  wide.lo = -100;
  wide.hi = 100;
  CHECK(weighted_lipschitz_norm(id, wide) > 5 * weighted_lipschitz_norm(id, coarse));
  for (auto f : {bump(), odd_bump(), cauchy()}) {
    double L = weighted_lipschitz_norm(f);
    CHECK(sobolev_half_seminorm_sq(f) <= M_PI * M_PI * L * L);
  }
}

TEST_CASE("derivatives match finite differences and support is honoured") {
  for (auto f : {bump(), odd_bump(), cauchy()}) {
    for (double u : {-0.7, -0.2, 0.1, 0.55}) {
      double h = 1e-5;
      double fd = (f(u + h) - f(u - h)) / (2 * h);
      CHECK(f.derivative(u) == doctest::Approx(fd).epsilon(1e-6));
    }
    if (f.support_hint)
      for (double u : {-3.0, -1.0001, 1.0001, 7.0}) CHECK(f(u) == 0.0);
  }
}

TEST_CASE("named and tabulated functions") {
  CHECK(function_by_name("bump").label == "bump");
  CHECK(function_by_name("odd-bump")(0.5) == doctest::Approx(0.5 * 0.5625));
  const char* path = "test_testfn_table.csv";
  {
    std::ofstream out(path);
    out << "u,f\n";
    for (int i = -40; i <= 40; ++i) {
      double u = i / 20.0;
      out << u << "," << std::exp(-u * u) << "\n";
    }
  }
  TestFunction t = function_by_name(path);
  CHECK(t(0.33) == doctest::Approx(std::exp(-0.33 * 0.33)).epsilon(1e-4));
  CHECK_THROWS_AS(function_by_name("no-such-function-or-file"), Error);
  std::remove(path);
}
