#include <doctest.h>

#include <atomic>
#include <cmath>
#include <random>
#include <stdexcept>

#include "meso/error.hpp"
#include "meso/mcstat.hpp"
#include "oracles.hpp"

using namespace meso;

namespace {

std::vector<double> normals(int m, unsigned seed) {
  std::mt19937_64 g(seed);
  std::normal_distribution<double> nd;
  std::vector<double> v(m);
  for (auto& x : v) x = nd(g);
  return v;
}

double uniform_cdf(double x) { return x < 0 ? 0 : x > 1 ? 1 : x; }

}  // namespace

TEST_CASE("linear statistic") {
  auto x = quantile_configuration(10000);
  CHECK(linear_statistic(x, constant_function(0.0), 0.3, 0.0) == 0.0);
  double macro = 10000 * oracle::simpson([](double u) { return std::pow(1 - u * u, 2) * std::sqrt(2 - u * u) / M_PI; }, -1, 1);
  CHECK(std::abs(linear_statistic(x, bump(), 0.0, 0.0) - macro) < 0.01 * 10000);
  CHECK(linear_statistic(make_configuration({0.4}), bump(), 0.7, 0.4) == 1.0);
  // the support window gives the same result as the naive sum
  auto y = sample_iid(3000, 2);
  TestFunction nohint = make_test_function("b", [](double u) { return u * u < 1 ? std::pow(1 - u * u, 2) : 0.0; });
  for (double a : {0.0, 0.3, 0.8})
    CHECK(linear_statistic(y, bump(), a, 0.2) == doctest::Approx(linear_statistic(y, nohint, a, 0.2)).epsilon(1e-13));
}

TEST_CASE("kolmogorov tail function") {
  // sum form at x = 1: 2 sum (-1)^{k-1} e^{-2k^2}
  double ref = 0;
  for (int k = 1; k < 50; ++k) ref += 2 * (k % 2 ? 1 : -1) * std::exp(-2.0 * k * k);
  CHECK(kolmogorov_q(1.0) == doctest::Approx(ref).epsilon(1e-12));
  CHECK(kolmogorov_q(1.358) == doctest::Approx(0.05).epsilon(0.01));
  CHECK(kolmogorov_q(0.0) == 1.0);
  CHECK(kolmogorov_q(5.0) < 1e-20);
  double prev = 1.0;
  for (double x = 0.1; x < 3; x += 0.05) {
    double v = kolmogorov_q(x);
    CHECK(v <= prev);
    prev = v;
  }
  // both branches join continuously
  CHECK(kolmogorov_q(1.18 - 1e-9) == doctest::Approx(kolmogorov_q(1.18 + 1e-9)).epsilon(1e-7));
}

TEST_CASE("gaussianity on the null and on an alternative") {
  auto r = gaussianity_report(normals(5000, 1));
  CHECK(std::abs(r.skewness) <= 0.1);
  CHECK(std::abs(r.excess_kurtosis) <= 0.2);
  CHECK(r.ks_pvalue >= 0.01);
  std::mt19937_64 g(2);
  std::exponential_distribution<double> ex(1.0);
  std::vector<double> e(5000);
  for (auto& v : e) v = ex(g);
  CHECK(gaussianity_report(e).ks_pvalue < 1e-6);
  CHECK_THROWS_AS(gaussianity_report(std::vector<double>(600, 2.0)), Error);
}

TEST_CASE("one and two sample KS") {
  std::mt19937_64 g(3);
  std::uniform_real_distribution<double> U;
  std::vector<double> u(2000);
  for (auto& v : u) v = U(g);
  auto [D, p] = ks_test(u, uniform_cdf);
  CHECK(D < 1.63 / std::sqrt(2000.0));
  CHECK(p > 0.01);
  auto a = normals(3000, 4), b = normals(3000, 5), c = normals(3000, 6);
  for (auto& v : c) v += 0.2;
  CHECK(ks_two_sample(a, b).pvalue > 0.01);
  CHECK(ks_two_sample(a, c).pvalue < 1e-6);
  CHECK(ks_two_sample({1, 2, 3}, {1, 2, 3}).statistic == 0.0);
}

TEST_CASE("p-values are calibrated on the null") {
  int reject = 0;
  for (unsigned s = 0; s < 400; ++s) reject += gaussianity_report(normals(500, 100 + s)).ks_pvalue < 0.05;
  // standardising makes the asymptotic KS law conservative; only an upper bound is checked
  CHECK(reject <= 0.05 * 400 + 3 * std::sqrt(400 * 0.05 * 0.95));
}

TEST_CASE("summary and jackknife") {
  auto x = normals(4000, 7);
  for (auto& v : x) v = 2 + 3 * v;
  auto s = summarize(x, 99);
  CHECK(s.n_trials == 4000);
  CHECK(s.seed == 99);
  CHECK(s.mean == doctest::Approx(2).epsilon(0.05));
  CHECK(s.variance == doctest::Approx(9).epsilon(0.08));
  CHECK(s.variance_ci_lo <= s.variance);
  CHECK(s.variance_ci_hi >= s.variance);
  // Var of the sample variance of a Gaussian is 2 sigma^4 / (m - 1)
  double se = std::sqrt(2.0 * 81 / 3999);
  CHECK(s.variance_stderr == doctest::Approx(se).epsilon(0.35));
  auto j = jackknife_variance(x, 20);
  CHECK(j.estimate == doctest::Approx(s.variance).epsilon(1e-12));
  CHECK_THROWS_AS(summarize({1.0}, 0), Error);
}

TEST_CASE("variance interval coverage on synthetic Gaussians") {
  int covered = 0;
  const int studies = 300;
  for (int k = 0; k < studies; ++k) {
    auto s = summarize(normals(1000, 5000 + k), 0);
    covered += s.variance_ci_lo <= 1.0 && 1.0 <= s.variance_ci_hi;
  }
  CHECK(covered >= 0.9 * studies);
}

TEST_CASE("n = 1 Monte Carlo reproduces the scalar Gaussian") {
  auto P = make_params(1, 0.5, 0.3, 0.8);
  auto id = make_test_function("id", [](double u) { return u; }, [](double) { return 1.0; });
  McInit init{InitKind::deterministic, make_configuration({0.0})};
  auto s = run_mc(P, id, init, 4000, 17);
  double exact = (1 - P.q * P.q) / 2;
  CHECK(std::abs(s.variance - exact) <= 3 * (s.variance_ci_hi - s.variance_ci_lo));
  CHECK(s.ks_pvalue > 0.001);
  CHECK(s.samples.size() == 4000);
}

TEST_CASE("Monte Carlo is deterministic in the seed and independent of threads") {
  auto P = make_params(24, 0.5, 0.3, 1.0);
  McOptions one;
  one.jobs = 1;
  McOptions many;
  many.jobs = 3;
  McInit det{};
  auto a = run_mc(P, bump(), det, 200, 5, one);
  auto b = run_mc(P, bump(), det, 200, 5, many);
  CHECK(a.samples == b.samples);
  CHECK(a.variance == b.variance);
  CHECK(a.ks_statistic == b.ks_statistic);
  auto c = run_mc(P, bump(), det, 200, 6, one);
  CHECK(c.samples != a.samples);
  McInit rnd{InitKind::random_iid, {}};
  auto r1 = run_mc(P, bump(), rnd, 200, 5, one), r2 = run_mc(P, bump(), rnd, 200, 5, many);
  CHECK(r1.samples == r2.samples);
  CHECK(r1.samples != a.samples);
  CHECK_THROWS_AS(run_mc(P, bump(), McInit{InitKind::deterministic, quantile_configuration(10)}, 200, 1), Error);
}

TEST_CASE("parallel_for") {
  std::atomic<int> total{0};
  parallel_for(100, 4, [&](int i) { total += i; });
  CHECK(total == 4950);
  CHECK_THROWS_AS(parallel_for(10, 2, [](int i) {
                    if (i == 7) throw std::runtime_error("trial");
                  }),
                  std::runtime_error);
  CHECK(resolve_jobs(3) == 3);
  CHECK(resolve_jobs(0) >= 1);
}

TEST_CASE("scaling regression") {
  std::vector<std::pair<double, double>> pts;
  for (double n : {256.0, 512.0, 1024.0, 2048.0}) pts.push_back({n, 2.5 * std::pow(n, 0.4)});
  auto f = scaling_regression(pts);
  CHECK(f.exponent == doctest::Approx(0.4).epsilon(1e-10));
  CHECK(f.log_prefactor == doctest::Approx(std::log(2.5)).epsilon(1e-10));
  CHECK(f.stderr_ < 1e-10);
  CHECK(fixed_exponent_prefactor(pts, 0.4) == doctest::Approx(2.5).epsilon(1e-12));

  int within = 0;
  std::mt19937_64 g(8);
  std::normal_distribution<double> nd(0, 0.1);
  for (int k = 0; k < 200; ++k) {
    std::vector<std::pair<double, double>> noisy;
    for (double n : {256.0, 512.0, 1024.0, 2048.0, 4096.0}) noisy.push_back({n, std::pow(n, -0.3) * std::exp(nd(g))});
    auto r = scaling_regression(noisy);
    within += std::abs(r.exponent + 0.3) <= 3 * r.stderr_;
  }
  // t quantile with 3 dof makes 3 stderr a ~94% interval
  CHECK(within >= 170);
  CHECK_THROWS_AS(scaling_regression({{1, 1}, {2, 2}}), Error);
  CHECK_THROWS_AS(scaling_regression({{1, 1}, {2, 0}, {3, 1}}), Error);
}
