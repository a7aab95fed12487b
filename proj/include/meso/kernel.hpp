#pragma once

#include <complex>
#include <map>
#include <memory>
#include <mutex>
#include <vector>

#include "meso/semicircle.hpp"
#include "meso/testfn.hpp"

namespace meso {

using cplx = std::complex<double>;

struct KernelContext {
  Configuration xi;
  double t = 0.0;
  double q = 1.0;      // e^{-t}
  double s = 0.0;      // 1 - q^2
  double kappa = 0.0;  // n / (1 - q^2)
  int n = 0;
};

KernelContext make_kernel_context(const Configuration& xi, double t);

// F_n(w;x) = (qw-x)^2 + ((1-q^2)/n) sum log(w - xi_j), principal logs.
cplx f_n(const KernelContext& ctx, cplx w, double x);
cplx f_n_prime(const KernelContext& ctx, cplx w, double x);
cplx f_n_second(const KernelContext& ctx, cplx w, double x);

// Omega(x) = x cosh t + i sqrt(2-x^2) sinh t
cplx saddle_limit(double x, double t);

struct SaddleResult {
  cplx omega;
  double residual = 0.0;
  int iterations = 0;
  cplx f_second;
};

// Damped Newton on F_n' started at Omega(x).
SaddleResult saddle_solve(const KernelContext& ctx, double x);

// All n+1 zeros of F_n'(w) prod (w - xi_j), sorted by real part.
std::vector<cplx> critical_points(const KernelContext& ctx, double x);

struct ContourQuadSpec {
  double rel_tol = 1e-11;
  double log_cutoff = 40.0;  // drop contour parts where the integrand is below e^-cutoff of its peak
  double panel_scale = 1.0;  // panel length in units of the local Gaussian width
  int max_depth = 30;
  int n_max = 12;
};

namespace detail {
struct XSide;
struct YSide;
}  // namespace detail

// Evaluates the conjugated kernel e^{-c(x)+c(y)} K_n(x,y), where
// c(x) = (n/(1-q^2)) Re F_n(anchor(x); x). Per-point contour data is cached.
class KernelEvaluator {
 public:
  explicit KernelEvaluator(KernelContext ctx, ContourQuadSpec spec = {});
  ~KernelEvaluator();

  double operator()(double x, double y) const;
  double log_scale(double x) const;
  const KernelContext& context() const { return ctx_; }
  const ContourQuadSpec& spec() const { return spec_; }

  // Conjugated integrable parts: phi_j(x) e^{-c(x)} and psi_j(x) e^{c(x)}.
  double phi(double x, int j) const;
  double psi(double y, int j) const;

 private:
  std::shared_ptr<const detail::XSide> xside(double x) const;
  std::shared_ptr<const detail::YSide> yside(double y) const;

  KernelContext ctx_;
  ContourQuadSpec spec_;
  mutable std::mutex mu_;
  mutable std::map<double, std::shared_ptr<const detail::XSide>> xs_;
  mutable std::map<double, std::shared_ptr<const detail::YSide>> ys_;
};

double kernel_eval(const KernelContext& ctx, double x, double y, const ContourQuadSpec& spec = {});

struct IntegrableParts {
  double phi;
  double psi;
};
IntegrableParts integrable_parts(const KernelEvaluator& K, double x, int j);
IntegrableParts integrable_parts(const KernelContext& ctx, double x, int j);

// Interval outside which K_n(x,x) is negligible.
Interval kernel_support(const KernelContext& ctx);

// |int_{-L}^{L} K(x,z) K(z,y) dz - K(x,y)| in the conjugated normalisation.
double reproducing_residual(const KernelEvaluator& K, double x, double y);
double reproducing_residual(const KernelContext& ctx, double x, double y);

// int_I K(x,z) K(z,y) dz - K(x,y), conjugated like kernel_eval.
double r_restricted(const KernelEvaluator& K, Interval I, double x, double y);
double r_restricted(const KernelContext& ctx, Interval I, double x, double y);

struct DeterminantalMoments {
  double mean = 0.0;
  double variance = 0.0;
  int nodes = 0;  // grid points per axis at convergence
};

// Var = int_I g^2 K(x,x) - int int_{IxI} g(x) g(y) K(x,y) K(y,x), with I the support of g
// (or kernel_support when g has none).
DeterminantalMoments determinantal_moments(const KernelEvaluator& K, const TestFunction& g,
                                           double tol = 1e-8);
double determinantal_variance(const KernelContext& ctx, const TestFunction& g);

struct Diagnostics {
  double e1;
  double e2;
  double e3;
};
// E_1..E_3 at Omega(x).
Diagnostics regularity_diagnostics(const KernelContext& ctx, double x);

}  // namespace meso
