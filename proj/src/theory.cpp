#include "meso/theory.hpp"

#include <cmath>
#include <complex>
#include <limits>

#include "meso/error.hpp"
#include "meso/semicircle.hpp"

namespace meso {

namespace {

double central_binomial(int p) {  // (2p)! / (p!)^2
  return std::tgamma(2.0 * p + 1.0) / std::pow(std::tgamma(p + 1.0), 2);
}

void check_bulk(double x_star) {
  if (!(std::abs(x_star) < kEdge)) throw Error(Errc::domain, "x_star must lie in (-sqrt2, sqrt2)");
}

void check_tau(double tau) {
  if (!(tau > 0.0)) throw Error(Errc::nonpositive_tau, "tau must be positive");
}

double abs_moment(const TestFunction& f, int k) {
  auto h = [&f, k](double u) { return std::pow(std::abs(u), k) * std::abs(f(u)); };
  if (f.support_hint) {
    const Interval s = *f.support_hint;
    std::vector<double> br;
    if (s.a < 0.0 && s.b > 0.0) br.push_back(0.0);
    return quad::integral(h, s.a, s.b, {}, br);
  }
  const double inf = std::numeric_limits<double>::infinity();
  return quad::integral(h, -inf, inf, {}, {0.0});
}

}  // namespace

double sigma_inf_sq(const TestFunction& f, const quad::Spec& spec) {
  return sobolev_half_seminorm_sq(f, spec) / (4.0 * M_PI * M_PI);
}

double sigma_inf_sq_fourier(const TestFunction& f, const quad::Spec& spec) {
  return spectral_integral(f, [](double w) { return std::abs(w); }, spec) / (2.0 * M_PI);
}

double sigma_tau_sq(const TestFunction& f, double tau, const quad::Spec& spec) {
  check_tau(tau);
  const double c = 2.0 * tau;
  auto weight = [c](double d) { return c / (d * d + c * c); };
  // int_d^inf r^-2 c/(r^2+c^2) dr
  auto tail = [c](double d, double) {
    double r = d / c;
    if (r > 1e3) {
      // series of 1/r - (pi/2 - atan r) to avoid cancellation
      double r2 = r * r;
      return (1.0 / (c * c)) * (1.0 / (3.0 * r * r2) - 1.0 / (5.0 * r2 * r2 * r));
    }
    return (1.0 / c) * (1.0 / d - (1.0 / c) * (M_PI / 2 - std::atan(r)));
  };
  double I = weighted_difference_integral(f, weight, tail, spec, c);
  return tau / (2.0 * M_PI * M_PI) * I;
}

double sigma_tau_sq_fourier(const TestFunction& f, double tau, const quad::Spec& spec) {
  check_tau(tau);
  auto w = [tau](double om) {
    double x = 2.0 * tau * std::abs(om);
    // e^{-x} - 1 + x, accurate for small x
    return (std::expm1(-x) + x) / tau;
  };
  return spectral_integral(f, w, spec) / (4.0 * M_PI);
}

double sigma_tau_sq_squared_weight(const TestFunction& f, double tau, const quad::Spec& spec) {
  check_tau(tau);
  const double c = 2.0 * tau, c2 = c * c;
  // (1/2)(2 - (d/(d+ic))^2 - (d/(d-ic))^2) = (3c^2 d^2 + c^4)/(d^2+c^2)^2
  auto weight = [c2](double d) {
    double D = d * d + c2;
    return (3.0 * c2 * d * d + c2 * c2) / (D * D);
  };
  auto tail = [c2](double d, double) { return c2 / (d * (d * d + c2)); };
  return weighted_difference_integral(f, weight, tail, spec, c) / (4.0 * M_PI * M_PI);
}

double sigma_tau_sq_squared_weight_fourier(const TestFunction& f, double tau, const quad::Spec& spec) {
  check_tau(tau);
  auto w = [tau](double om) { return -std::abs(om) * std::expm1(-2.0 * tau * std::abs(om)); };
  return spectral_integral(f, w, spec) / (2.0 * M_PI);
}

double classical_variance(const TestFunction& f, double x_star) {
  check_bulk(x_star);
  return std::sqrt(2.0 - x_star * x_star) / M_PI * l2_norm_sq(f);
}

double critical_random_variance(const TestFunction& f, double tau, double x_star) {
  check_bulk(x_star);
  check_tau(tau);
  return std::sqrt(2.0 - x_star * x_star) / M_PI * l2_norm_sq(poisson_smooth(f, tau));
}

double s_p_from_moment(double mu_p, int p, double tau, double x_star) {
  check_bulk(x_star);
  check_tau(tau);
  if (p < 0) throw Error(Errc::invalid_argument, "p must be nonnegative");
  return std::sqrt(2.0 - x_star * x_star) * central_binomial(p) * mu_p * mu_p /
         (2.0 * M_PI * M_PI * std::pow(4.0, 2 * p) * std::pow(tau, 2 * p + 1));
}

double s_p_variance(const TestFunction& f, int p, double tau, double x_star) {
  if (p < 0) throw Error(Errc::invalid_argument, "p must be nonnegative");
  for (int k = 0; k < p; ++k) {
    double mk = moment(f, k);
    if (std::abs(mk) > 1e-8 * abs_moment(f, k))
      throw Error(Errc::nonzero_lower_moment, "moment " + std::to_string(k) + " does not vanish");
  }
  double mp = moment(f, p);
  if (std::abs(mp) <= 1e-8 * abs_moment(f, p))
    throw Error(Errc::vanishing_moment, "moment " + std::to_string(p) + " vanishes");
  return s_p_from_moment(mp, p, tau, x_star);
}

int lowest_nonvanishing_moment(const TestFunction& f, int pmax) {
  for (int k = 0; k <= pmax; ++k) {
    double mk = moment(f, k);
    if (std::abs(mk) > 1e-8 * abs_moment(f, k)) return k;
  }
  throw Error(Errc::vanishing_moment, "all moments up to pmax vanish");
}

const char* regime_name(Regime r) {
  switch (r) {
    case Regime::deterministic_sub: return "deterministic_sub";
    case Regime::deterministic_critical: return "deterministic_critical";
    case Regime::deterministic_gue: return "deterministic_gue";
    case Regime::random_classical: return "random_classical";
    case Regime::random_critical: return "random_critical";
    case Regime::random_intermediate: return "random_intermediate";
    case Regime::random_boundary: return "random_boundary";
    case Regime::random_gue: return "random_gue";
  }
  return "unknown";
}

double random_boundary_alpha(double gamma, int p) {
  return ((2.0 * p + 1.0) * gamma + 1.0) / (2.0 * p + 2.0);
}

RegimePrediction classify_regime(double alpha, double gamma, int p, bool random_init) {
  if (!(alpha > 0.0 && alpha < 1.0) || !(gamma > 0.0 && gamma < 1.0))
    throw Error(Errc::invalid_argument, "alpha and gamma must lie strictly inside (0,1)");
  if (p < 0) throw Error(Errc::invalid_argument, "p must be nonnegative");
  RegimePrediction r;
  r.limit_variance_constant = std::numeric_limits<double>::quiet_NaN();
  const bool eq = std::abs(alpha - gamma) <= kEqualityTol;
  if (!random_init) {
    r.variance_scale_exponent = 0.0;
    if (eq) {
      r.regime = Regime::deterministic_critical;
      r.notes = "O(1): sigma_tau^2";
    } else if (alpha < gamma) {
      r.regime = Regime::deterministic_sub;
      r.notes = "o(1), no constant predicted";
    } else {
      r.regime = Regime::deterministic_gue;
      r.notes = "O(1): sigma_inf^2";
    }
    return r;
  }
  const double b = random_boundary_alpha(gamma, p);
  if (eq) {
    r.regime = Regime::random_critical;
    r.variance_scale_exponent = 1.0 - alpha;
    r.notes = "n^{1-alpha} pi^-1 sqrt(2-x*^2) |P_tau f|^2";
  } else if (alpha < gamma) {
    r.regime = Regime::random_classical;
    r.variance_scale_exponent = 1.0 - alpha;
    r.notes = "n^{1-alpha} pi^-1 sqrt(2-x*^2) |f|^2";
  } else if (std::abs(alpha - b) <= kEqualityTol) {
    r.regime = Regime::random_boundary;
    r.variance_scale_exponent = 0.0;
    r.notes = "S_p + sigma_inf^2";
  } else if (alpha < b) {
    r.regime = Regime::random_intermediate;
    r.variance_scale_exponent = 1.0 - alpha + (2.0 * p + 1.0) * (gamma - alpha);
    r.notes = "n^{1-alpha+(2p+1)(gamma-alpha)} S_p";
  } else {
    r.regime = Regime::random_gue;
    r.variance_scale_exponent = 0.0;
    r.notes = "sigma_inf^2";
  }
  return r;
}

RegimePrediction predict(const TestFunction& f, double alpha, double gamma, double tau,
                         double x_star, bool random_init) {
  check_tau(tau);
  check_bulk(x_star);
  int p = 0;
  if (random_init && alpha > gamma + kEqualityTol) p = lowest_nonvanishing_moment(f);
  RegimePrediction r = classify_regime(alpha, gamma, p, random_init);
  switch (r.regime) {
    case Regime::deterministic_sub: break;
    case Regime::deterministic_critical: r.limit_variance_constant = sigma_tau_sq(f, tau); break;
    case Regime::deterministic_gue:
    case Regime::random_gue: r.limit_variance_constant = sigma_inf_sq(f); break;
    case Regime::random_classical: r.limit_variance_constant = classical_variance(f, x_star); break;
    case Regime::random_critical:
      r.limit_variance_constant = critical_random_variance(f, tau, x_star);
      break;
    case Regime::random_intermediate:
      r.limit_variance_constant = s_p_from_moment(moment(f, p), p, tau, x_star);
      break;
    case Regime::random_boundary:
      r.limit_variance_constant = s_p_from_moment(moment(f, p), p, tau, x_star) + sigma_inf_sq(f);
      break;
  }
  if (random_init) r.notes += "; p=" + std::to_string(p);
  return r;
}

double var_im_xp_prediction(int p, double gamma, double tau, int n) {
  if (p < 0) throw Error(Errc::invalid_argument, "p must be nonnegative");
  check_tau(tau);
  if (n < 1) throw Error(Errc::invalid_argument, "n must be >= 1");
  return std::pow(static_cast<double>(n), (2.0 * p + 1.0) * gamma - 1.0) * central_binomial(p) /
         (std::sqrt(2.0) * std::pow(4.0, p) * std::pow(tau, 2 * p + 1));
}

IdentitySides kernel_weight_identity(double u, double v, double tau) {
  using C = std::complex<double>;
  const double d = u - v;
  C a = C(d, 0) / C(d, 2 * tau), b = C(d, 0) / C(d, -2 * tau);
  C lhs = 2.0 - a * a - b * b;
  return {lhs.real(), 8 * tau * tau / (d * d + 4 * tau * tau)};
}

IdentitySides kernel_weight_identity_unsquared(double u, double v, double tau) {
  using C = std::complex<double>;
  const double d = u - v;
  C lhs = 2.0 - C(d, 0) / C(d, 2 * tau) - C(d, 0) / C(d, -2 * tau);
  return {lhs.real(), 8 * tau * tau / (d * d + 4 * tau * tau)};
}

}  // namespace meso
