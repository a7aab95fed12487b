#include "meso/quad.hpp"

#include <gsl/gsl_errno.h>
#include <gsl/gsl_integration.h>

#include <algorithm>
#include <boost/math/quadrature/gauss.hpp>
#include <cmath>
#include <memory>
#include <mutex>

#include "meso/error.hpp"

namespace meso::quad {

namespace {

void quiet_gsl() {
  static std::once_flag once;
  std::call_once(once, [] { gsl_set_error_handler_off(); });
}

double trampoline(double x, void* p) { return (*static_cast<const Fn*>(p))(x); }

struct Workspace {
  explicit Workspace(std::size_t n) : w(gsl_integration_workspace_alloc(n)) {}
  ~Workspace() { gsl_integration_workspace_free(w); }
  gsl_integration_workspace* w;
};

void check(int status, const char* where) {
  if (status == GSL_SUCCESS || status == GSL_EROUND) return;
  if (status == GSL_EDIVERGE) throw Error(Errc::divergent_integral, where);
  if (status == GSL_ESING || status == GSL_EMAXITER || status == GSL_ETOL)
    throw Error(Errc::quadrature_failure, std::string(where) + ": " + gsl_strerror(status));
  throw Error(Errc::quadrature_failure, std::string(where) + ": " + gsl_strerror(status));
}

Result run(const Fn& g, double a, double b, const Spec& spec, std::vector<double> pts) {
  Workspace ws(spec.limit);
  gsl_function F{&trampoline, const_cast<Fn*>(&g)};
  Result r;
  int status;
  if (pts.empty()) {
    status = gsl_integration_qags(&F, a, b, spec.epsabs, spec.epsrel, spec.limit, ws.w, &r.value,
                                  &r.abserr);
  } else {
    std::vector<double> all{a};
    std::sort(pts.begin(), pts.end());
    for (double p : pts)
      if (p > all.back() && p < b) all.push_back(p);
    all.push_back(b);
    status = gsl_integration_qagp(&F, all.data(), all.size(), spec.epsabs, spec.epsrel, spec.limit,
                                  ws.w, &r.value, &r.abserr);
  }
  check(status, "adaptive quadrature");
  if (!std::isfinite(r.value)) throw Error(Errc::divergent_integral, "non-finite integral");
  return r;
}

}  // namespace

Result integrate(const Fn& f, double a, double b, const Spec& spec, std::vector<double> breaks) {
  quiet_gsl();
  if (a == b) return {};
  if (a > b) {
    Result r = integrate(f, b, a, spec, std::move(breaks));
    r.value = -r.value;
    return r;
  }
  if (std::isfinite(a) && std::isfinite(b)) return run(f, a, b, spec, std::move(breaks));

  // tan map for infinite ends
  double ta = std::isfinite(a) ? std::atan(a) : -M_PI / 2;
  double tb = std::isfinite(b) ? std::atan(b) : M_PI / 2;
  Fn g = [&f](double th) {
    double c = std::cos(th);
    if (c == 0.0) return 0.0;
    double v = f(std::tan(th));
    return v / (c * c);
  };
  for (double& p : breaks) p = std::atan(p);
  return run(g, ta, tb, spec, std::move(breaks));
}

double integral(const Fn& f, double a, double b, const Spec& spec, std::vector<double> breaks) {
  return integrate(f, a, b, spec, std::move(breaks)).value;
}

double oscillatory(const Fn& f, double a, double b, double omega, bool sine, const Spec& spec) {
  quiet_gsl();
  if (omega == 0.0) {
    if (sine) return 0.0;
    return integral(f, a, b, spec);
  }
  Workspace ws(spec.limit);
  std::unique_ptr<gsl_integration_qawo_table, decltype(&gsl_integration_qawo_table_free)> tab(
      gsl_integration_qawo_table_alloc(omega, b - a, sine ? GSL_INTEG_SINE : GSL_INTEG_COSINE, 30),
      &gsl_integration_qawo_table_free);
  // QAWO works with sin(omega (x - a)); shift the phase back analytically.
  Fn g = [&f, a](double u) { return f(u + a); };
  gsl_function F{&trampoline, &g};
  double c = 0, s = 0, err;
  gsl_integration_qawo_table_set(tab.get(), omega, b - a, GSL_INTEG_COSINE);
  check(gsl_integration_qawo(&F, 0.0, spec.epsabs, spec.epsrel, spec.limit, ws.w, tab.get(), &c, &err),
        "qawo");
  gsl_integration_qawo_table_set(tab.get(), omega, b - a, GSL_INTEG_SINE);
  check(gsl_integration_qawo(&F, 0.0, spec.epsabs, spec.epsrel, spec.limit, ws.w, tab.get(), &s, &err),
        "qawo");
  double ca = std::cos(omega * a), sa = std::sin(omega * a);
  // cos(w(u+a)) = cos(wu)cos(wa) - sin(wu)sin(wa); sin(w(u+a)) = sin(wu)cos(wa) + cos(wu)sin(wa)
  return sine ? s * ca + c * sa : c * ca - s * sa;
}

double oscillatory_tail(const Fn& f, double a, double omega, bool sine, const Spec& spec) {
  quiet_gsl();
  if (omega == 0.0) throw Error(Errc::invalid_argument, "oscillatory_tail needs omega != 0");
  double w = std::abs(omega);
  double sgn = (sine && omega < 0) ? -1.0 : 1.0;
  Workspace ws(spec.limit), cyc(spec.limit);
  std::unique_ptr<gsl_integration_qawo_table, decltype(&gsl_integration_qawo_table_free)> tab(
      gsl_integration_qawo_table_alloc(w, 1.0, sine ? GSL_INTEG_SINE : GSL_INTEG_COSINE, 30),
      &gsl_integration_qawo_table_free);
  gsl_function F{&trampoline, const_cast<Fn*>(&f)};
  double r, err;
  check(gsl_integration_qawf(&F, a, spec.epsabs, spec.limit, ws.w, cyc.w, tab.get(), &r, &err), "qawf");
  return sgn * r;
}

const std::array<double, 32>& gl32_nodes() {
  static const std::array<double, 32> x = [] {
    using G = boost::math::quadrature::gauss<double, 32>;
    std::array<double, 32> out{};
    const auto& ab = G::abscissa();
    // boost stores the 16 non-negative abscissae
    for (int i = 0; i < 16; ++i) {
      out[15 - i] = -ab[i];
      out[16 + i] = ab[i];
    }
    return out;
  }();
  return x;
}

const std::array<double, 32>& gl32_weights() {
  static const std::array<double, 32> w = [] {
    using G = boost::math::quadrature::gauss<double, 32>;
    std::array<double, 32> out{};
    const auto& wt = G::weights();
    for (int i = 0; i < 16; ++i) {
      out[15 - i] = wt[i];
      out[16 + i] = wt[i];
    }
    return out;
  }();
  return w;
}

}  // namespace meso::quad
