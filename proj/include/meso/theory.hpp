#pragma once

#include <string>

#include "meso/testfn.hpp"

namespace meso {

// (1/4pi^2) int int ((f(u)-f(v))/(u-v))^2 du dv
double sigma_inf_sq(const TestFunction& f, const quad::Spec& spec = {});
// (1/2pi) int |fhat|^2 |w| dw
double sigma_inf_sq_fourier(const TestFunction& f, const quad::Spec& spec = {});

// (tau/2pi^2) int int ((f(u)-f(v))/(u-v))^2 2tau/((u-v)^2+4tau^2) du dv
double sigma_tau_sq(const TestFunction& f, double tau, const quad::Spec& spec = {});
// (1/4pi) int |fhat|^2 (e^{-2tau|w|} - 1 + 2tau|w|)/tau dw
double sigma_tau_sq_fourier(const TestFunction& f, double tau, const quad::Spec& spec = {});

// Variance built from the squared terms 2 - (d/(d+2i tau))^2 - (d/(d-2i tau))^2 kept as they are,
// (1/8pi^2) int int ((f(u)-f(v))/(u-v))^2 (that weight) du dv. Agrees with Monte Carlo at alpha = gamma.
double sigma_tau_sq_squared_weight(const TestFunction& f, double tau, const quad::Spec& spec = {});
// (1/2pi) int |fhat|^2 |w| (1 - e^{-2tau|w|}) dw
double sigma_tau_sq_squared_weight_fourier(const TestFunction& f, double tau,
                                           const quad::Spec& spec = {});

// pi^{-1} sqrt(2 - x*^2) ||f||^2
double classical_variance(const TestFunction& f, double x_star);
// pi^{-1} sqrt(2 - x*^2) ||P_tau f||^2
double critical_random_variance(const TestFunction& f, double tau, double x_star);

// sqrt(2-x*^2) (2p)! mu_p^2 / (2 pi^2 (p!)^2 4^{2p} tau^{2p+1})
double s_p_variance(const TestFunction& f, int p, double tau, double x_star);
double s_p_from_moment(double mu_p, int p, double tau, double x_star);

// Smallest p with |mu_p| above 1e-8 times the scale of f; throws vanishing_moment past pmax.
int lowest_nonvanishing_moment(const TestFunction& f, int pmax = 8);

enum class Regime {
  deterministic_sub,
  deterministic_critical,
  deterministic_gue,
  random_classical,
  random_critical,
  random_intermediate,
  random_boundary,
  random_gue,
};

const char* regime_name(Regime r);

struct RegimePrediction {
  Regime regime = Regime::deterministic_gue;
  double variance_scale_exponent = 0.0;  // Var Y_n ~ n^e
  double limit_variance_constant = 0.0;  // NaN when the theory gives only o(1)
  std::string notes;
};

inline constexpr double kEqualityTol = 1e-12;

// ((2p+1) gamma + 1) / (2p + 2)
double random_boundary_alpha(double gamma, int p);

// Regime and exponent only; limit_variance_constant is left NaN.
RegimePrediction classify_regime(double alpha, double gamma, int p, bool random_init);

// Full prediction including the constant for f at (tau, x*). p is computed from f.
RegimePrediction predict(const TestFunction& f, double alpha, double gamma, double tau,
                         double x_star, bool random_init);

// Leading order of Var Im X_p.
double var_im_xp_prediction(int p, double gamma, double tau, int n);

// Both sides of 2 - (d/(d+2i tau))^2 - (d/(d-2i tau))^2 = 8 tau^2/(d^2+4 tau^2).
struct IdentitySides {
  double lhs;
  double rhs;
};
IdentitySides kernel_weight_identity(double u, double v, double tau);
// The same with first powers, 2 - d/(d+2i tau) - d/(d-2i tau); this form equals the right side exactly.
IdentitySides kernel_weight_identity_unsquared(double u, double v, double tau);

}  // namespace meso
