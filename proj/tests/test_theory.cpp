#include <doctest.h>

#include <cmath>
#include <random>

#include "meso/error.hpp"
#include "meso/semicircle.hpp"
#include "meso/theory.hpp"
#include "oracles.hpp"

using namespace meso;

namespace {

double factorial(int k) { return std::tgamma(k + 1.0); }

// closed form of S_p straight from the moment
double s_p_oracle(double mu, int p, double tau, double xs) {
  return std::sqrt(2 - xs * xs) * factorial(2 * p) * mu * mu /
         (2 * M_PI * M_PI * factorial(p) * factorial(p) * std::pow(4.0, 2 * p) * std::pow(tau, 2 * p + 1));
}

}  // namespace

TEST_CASE("sigma_inf") {
  CHECK(sigma_inf_sq(cauchy()) == doctest::Approx(0.125).epsilon(1e-8));
  CHECK(std::abs(sigma_inf_sq(constant_function(1.5))) < 1e-12);
  for (auto f : {bump(), odd_bump(), cauchy()})
    CHECK(sigma_inf_sq(f) == doctest::Approx(sigma_inf_sq_fourier(f)).epsilon(1e-6));
  // frozen from the Fourier-side oracle
  CHECK(sigma_inf_sq(bump()) == doctest::Approx(0.1801265487).epsilon(1e-8));
  CHECK(sigma_inf_sq(odd_bump()) == doctest::Approx(0.0360253097).epsilon(1e-8));
}

TEST_CASE("sigma_tau") {
  for (double tau : {0.1, 1.0, 3.0})
    CHECK(sigma_tau_sq(cauchy(), tau) == doctest::Approx(tau / (8 * (1 + tau))).epsilon(1e-7));
  CHECK(sigma_tau_sq(cauchy(), 100.0) == doctest::Approx(0.125).epsilon(0.01));
  CHECK(sigma_tau_sq(cauchy(), 1e-3) == doctest::Approx(1e-3 / 8).epsilon(0.005));
  for (auto f : {bump(), odd_bump(), cauchy()})
    for (double tau : {0.05, 0.7, 4.0})
      CHECK(sigma_tau_sq(f, tau) == doctest::Approx(sigma_tau_sq_fourier(f, tau)).epsilon(1e-6));
  CHECK_THROWS_AS(sigma_tau_sq(bump(), 0.0), Error);
  CHECK_THROWS_AS(sigma_tau_sq(bump(), -2.0), Error);
}

TEST_CASE("sigma_tau is bounded by sigma_inf and nondecreasing") {
  for (auto f : {bump(), odd_bump()}) {
    double prev = 0, inf = sigma_inf_sq(f);
    for (double tau : {0.01, 0.1, 0.5, 1.0, 5.0, 30.0}) {
      double v = sigma_tau_sq(f, tau);
      CHECK(v >= prev);
      CHECK(v <= inf * (1 + 1e-9));
      prev = v;
    }
  }
}

TEST_CASE("classical and critical random variances") {
  CHECK(classical_variance(cauchy(), 0.0) == doctest::Approx(std::sqrt(2.0) / 2).epsilon(1e-9));
  CHECK(classical_variance(constant_function(0.0), 0.3) == 0.0);
  CHECK(classical_variance(cauchy(), kEdge - 1e-9) < 1e-4);
  CHECK_THROWS_AS(classical_variance(cauchy(), 1.5), Error);
  CHECK(critical_random_variance(cauchy(), 1.0, 0.0) == doctest::Approx(std::sqrt(2.0) / 4).epsilon(1e-8));
  CHECK(critical_random_variance(bump(), 1e-4, 0.4) == doctest::Approx(classical_variance(bump(), 0.4)).epsilon(1e-3));
  double mu0 = 16.0 / 15.0;
  CHECK(50.0 * critical_random_variance(bump(), 50.0, 0.0) ==
        doctest::Approx(std::sqrt(2.0) * mu0 * mu0 / (2 * M_PI * M_PI)).epsilon(0.05));
}

TEST_CASE("S_p") {
  CHECK(s_p_variance(odd_bump(), 1, 1.0, 0.0) == doctest::Approx(2.079489e-4).epsilon(1e-5));
  CHECK(s_p_variance(bump(), 0, 1.0, 0.0) == doctest::Approx(0.081516).epsilon(1e-5));
  CHECK(s_p_variance(odd_bump(), 1, 1.0, 0.0) == doctest::Approx(s_p_oracle(16.0 / 105.0, 1, 1.0, 0.0)).epsilon(1e-9));
  CHECK(s_p_from_moment(0.3, 2, 0.7, 0.5) == doctest::Approx(s_p_oracle(0.3, 2, 0.7, 0.5)).epsilon(1e-14));
  for (int p : {0, 1, 3}) {
    double c = s_p_from_moment(1.0, p, 1.0, 0.2);
    for (double tau : {0.3, 2.0, 17.0})
      CHECK(s_p_from_moment(1.0, p, tau, 0.2) * std::pow(tau, 2 * p + 1) == doctest::Approx(c).epsilon(1e-12));
  }
  CHECK_THROWS_AS(s_p_variance(odd_bump(), 0, 1.0, 0.0), Error);
  CHECK_THROWS_AS(s_p_variance(bump(), 1, 1.0, 0.0), Error);
  try {
    s_p_variance(bump(), 1, 1.0, 0.0);
  } catch (const Error& e) {
    CHECK(e.code() == Errc::nonzero_lower_moment);
  }
  try {
    s_p_variance(odd_bump(), 0, 1.0, 0.0);
  } catch (const Error& e) {
    CHECK(e.code() == Errc::vanishing_moment);
  }
}

TEST_CASE("lowest nonvanishing moment") {
  CHECK(lowest_nonvanishing_moment(bump()) == 0);
  CHECK(lowest_nonvanishing_moment(odd_bump()) == 1);
  auto u2 = make_test_function("u2", [](double u) { return (u * u - 0.2) * std::pow(1 - u * u, 2); }, {}, Interval{-1, 1});
  // mu_0 = 16/105 - 0.2 * 16/15 = -0.060952...; shift to kill it
  double c = (16.0 / 105.0) / (16.0 / 15.0);
  auto even2 = make_test_function("e2", [c](double u) { return (u * u - c) * std::pow(1 - u * u, 2); }, {}, Interval{-1, 1});
  CHECK(lowest_nonvanishing_moment(u2) == 0);
  CHECK(lowest_nonvanishing_moment(even2) == 2);
  CHECK_THROWS_AS(lowest_nonvanishing_moment(constant_function(0.0)), Error);
}

TEST_CASE("regime classification examples") {
  auto a = predict(bump(), 0.5, 0.3, 1.0, 0.0, false);
  CHECK(a.regime == Regime::deterministic_gue);
  CHECK(a.limit_variance_constant == doctest::Approx(sigma_inf_sq(bump())));
  auto b = predict(bump(), 0.3, 0.3, 1.0, 0.0, true);
  CHECK(b.regime == Regime::random_critical);
  CHECK(b.variance_scale_exponent == doctest::Approx(0.7));
  CHECK(b.limit_variance_constant == doctest::Approx(critical_random_variance(bump(), 1.0, 0.0)));
  auto c = predict(odd_bump(), 0.6, 0.4, 1.0, 0.0, true);
  CHECK(random_boundary_alpha(0.4, 1) == doctest::Approx(0.55));
  CHECK(c.regime == Regime::random_gue);
  CHECK(c.limit_variance_constant == doctest::Approx(sigma_inf_sq(odd_bump())));
  auto d = predict(odd_bump(), 0.5, 0.4, 1.0, 0.0, true);
  CHECK(d.regime == Regime::random_intermediate);
  CHECK(d.variance_scale_exponent == doctest::Approx(1 - 0.5 + 3 * (0.4 - 0.5)));
  CHECK(d.limit_variance_constant == doctest::Approx(s_p_variance(odd_bump(), 1, 1.0, 0.0)));
  auto e = predict(odd_bump(), 0.55, 0.4, 1.0, 0.0, true);
  CHECK(e.regime == Regime::random_boundary);
  CHECK(e.limit_variance_constant == doctest::Approx(s_p_variance(odd_bump(), 1, 1.0, 0.0) + sigma_inf_sq(odd_bump())));
  CHECK(predict(bump(), 0.2, 0.3, 1.0, 0.0, false).regime == Regime::deterministic_sub);
  CHECK(std::isnan(predict(bump(), 0.2, 0.3, 1.0, 0.0, false).limit_variance_constant));
  CHECK(predict(bump(), 0.3, 0.3, 2.0, 0.0, false).limit_variance_constant == doctest::Approx(sigma_tau_sq(bump(), 2.0)));
  CHECK(predict(cauchy(), 0.2, 0.3, 1.0, 0.5, true).limit_variance_constant == doctest::Approx(classical_variance(cauchy(), 0.5)));
  CHECK_THROWS_AS(classify_regime(0.0, 0.3, 0, true), Error);
  CHECK_THROWS_AS(classify_regime(0.5, 1.0, 0, true), Error);
}

TEST_CASE("regime classification is exhaustive and consistent") {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> U(0.01, 0.99);
  for (int i = 0; i < 2000; ++i) {
    double a = U(rng), g = U(rng);
    int p = static_cast<int>(rng() % 4);
    auto det = classify_regime(a, g, p, false);
    CHECK(det.variance_scale_exponent == 0.0);
    CHECK((det.regime == Regime::deterministic_sub) == (a < g));
    CHECK((det.regime == Regime::deterministic_gue) == (a > g));
    auto r = classify_regime(a, g, p, true);
    double b = random_boundary_alpha(g, p);
    CHECK(b > g);
    if (a < g) {
      CHECK(r.regime == Regime::random_classical);
      CHECK(r.variance_scale_exponent == doctest::Approx(1 - a));
    } else if (a < b) {
      CHECK(r.regime == Regime::random_intermediate);
      CHECK(r.variance_scale_exponent > 0.0);
    } else {
      CHECK(r.regime == Regime::random_gue);
    }
  }
  // exponent is continuous across both random boundaries
  for (int p : {0, 1, 2}) {
    double g = 0.35, b = random_boundary_alpha(g, p);
    CHECK(classify_regime(g + 1e-9, g, p, true).variance_scale_exponent == doctest::Approx(1 - g).epsilon(1e-6));
    CHECK(std::abs(classify_regime(b - 1e-9, g, p, true).variance_scale_exponent) < 1e-6);
  }
}

TEST_CASE("Var Im X_p prediction") {
  CHECK(var_im_xp_prediction(0, 0.5, 1.0, 10000) == doctest::Approx(0.00707107).epsilon(1e-6));
  CHECK(var_im_xp_prediction(1, 0.4, 1.0, 4096) == doctest::Approx(1.866066).epsilon(1e-6));
  for (int p : {0, 1, 2})
    CHECK(var_im_xp_prediction(p, 0.3, 2.0, 500) / var_im_xp_prediction(p, 0.3, 1.0, 500) ==
          doctest::Approx(std::pow(2.0, -(2 * p + 1))).epsilon(1e-12));
}

TEST_CASE("kernel weight identity") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> U(-5, 5), T(0.01, 5);
  double worst_unsq = 0;
  for (int i = 0; i < 1000; ++i) {
    auto s = kernel_weight_identity_unsquared(U(rng), U(rng), T(rng));
    worst_unsq = std::max(worst_unsq, std::abs(s.lhs - s.rhs));
  }
  CHECK(worst_unsq < 1e-12);
  // the squared form: its left side is (24 d^2 tau^2 + 32 tau^4)/(d^2 + 4 tau^2)^2
  for (int i = 0; i < 200; ++i) {
    double u = U(rng), v = U(rng), tau = T(rng), d = u - v, D = d * d + 4 * tau * tau;
    auto s = kernel_weight_identity(u, v, tau);
    CHECK(s.lhs == doctest::Approx((24 * d * d * tau * tau + 32 * std::pow(tau, 4)) / (D * D)).epsilon(1e-10));
    CHECK(s.rhs == doctest::Approx(8 * tau * tau / D).epsilon(1e-14));
  }
}

TEST_CASE("sigma_tau with the squared weight") {
  // Fourier side from the closed-form transform of the bump, Simpson in omega
  auto fb = [](double w) {
    if (std::abs(w) < 0.05) return 16.0 / 15.0 - 16.0 * w * w / 105.0;
    return 16.0 * ((3 - w * w) * std::sin(w) - 3 * w * std::cos(w)) / std::pow(w, 5);
  };
  auto ref = [&](double tau) {
    return 2 * oracle::simpson([&](double w) { return fb(w) * fb(w) / (2 * M_PI) * w * -std::expm1(-2 * tau * w); }, 0, 400, 400000) /
           (2 * M_PI);
  };
  CHECK(sigma_tau_sq_squared_weight(bump(), 1.0) == doctest::Approx(ref(1.0)).epsilon(1e-6));
  CHECK(sigma_tau_sq_squared_weight(bump(), 1.0) == doctest::Approx(0.1680938309).epsilon(1e-7));
  for (auto f : {bump(), odd_bump(), cauchy()})
    for (double tau : {0.05, 0.7, 4.0})
      CHECK(sigma_tau_sq_squared_weight(f, tau) == doctest::Approx(sigma_tau_sq_squared_weight_fourier(f, tau)).epsilon(1e-6));
  // cauchy: (1/2pi)(pi/2) int e^{-2w} w (1 - e^{-2 tau w}) 2 dw = (1/8)(1 - 1/(1+tau)^2)
  for (double tau : {0.3, 1.0, 5.0})
    CHECK(sigma_tau_sq_squared_weight(cauchy(), tau) == doctest::Approx((1 - 1 / ((1 + tau) * (1 + tau))) / 8).epsilon(1e-7));
  // lies between the simplified form and sigma_inf, with both limits shared
  for (double tau : {0.2, 1.0, 3.0}) {
    double v = sigma_tau_sq_squared_weight(bump(), tau);
    CHECK(v > sigma_tau_sq(bump(), tau));
    CHECK(v < sigma_inf_sq(bump()));
  }
  CHECK(sigma_tau_sq_squared_weight(bump(), 200.0) == doctest::Approx(sigma_inf_sq(bump())).epsilon(0.01));
}
