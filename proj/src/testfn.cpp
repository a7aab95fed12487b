#include "meso/testfn.hpp"

#include <gsl/gsl_spline.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <memory>
#include <sstream>

#include "meso/error.hpp"

namespace meso {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

quad::Spec tight(const quad::Spec& s) {
  quad::Spec t = s;
  t.epsabs = std::min(s.epsabs, 1e-13);
  t.epsrel = std::min(s.epsrel, 1e-11);
  return t;
}

// Fails when |u|^p |g(u)| keeps growing far out, i.e. g decays slower than |u|^-p.
void require_decay(const std::function<double(double)>& g, double p, const char* what) {
  for (double sgn : {-1.0, 1.0}) {
    double u1 = sgn * 1e3, u2 = sgn * 1e6;
    double r1 = std::abs(g(u1)) * std::pow(1e3, p);
    double r2 = std::abs(g(u2)) * std::pow(1e6, p);
    if (!std::isfinite(r2) || r2 > 10.0 * r1 + 1e-300)
      throw Error(Errc::divergent_integral, std::string(what) + ": integrand does not decay");
  }
}

double central_difference(const std::function<double(double)>& f, double u) {
  double h = 1e-5 * std::max(1.0, std::abs(u));
  return (f(u + h) - f(u - h)) / (2 * h);
}

}  // namespace

TestFunction make_test_function(std::string label, std::function<double(double)> f,
                                std::function<double(double)> df, std::optional<Interval> support) {
  TestFunction out;
  out.label = std::move(label);
  out.support_hint = support;
  if (support) {
    Interval s = *support;
    auto inner = std::move(f);
    out.evaluator = [inner, s](double u) { return s.contains(u) ? inner(u) : 0.0; };
  } else {
    out.evaluator = std::move(f);
  }
  if (df) {
    if (support) {
      Interval s = *support;
      out.derivative_evaluator = [df, s](double u) { return s.contains(u) ? df(u) : 0.0; };
    } else {
      out.derivative_evaluator = std::move(df);
    }
  } else {
    auto ev = out.evaluator;
    out.derivative_evaluator = [ev](double u) { return central_difference(ev, u); };
  }
  return out;
}

TestFunction bump() {
  return make_test_function(
      "bump", [](double u) { double a = 1 - u * u; return a * a; },
      [](double u) { return -4 * u * (1 - u * u); }, Interval{-1, 1});
}

TestFunction odd_bump() {
  return make_test_function(
      "odd-bump", [](double u) { double a = 1 - u * u; return u * a * a; },
      [](double u) { double a = 1 - u * u; return a * a - 4 * u * u * a; }, Interval{-1, 1});
}

TestFunction cauchy() {
  return make_test_function(
      "cauchy", [](double u) { return 1 / (1 + u * u); },
      [](double u) { double d = 1 + u * u; return -2 * u / (d * d); });
}

TestFunction constant_function(double c) {
  return make_test_function("constant", [c](double) { return c; }, [](double) { return 0.0; });
}

TestFunction rescaled(const TestFunction& f, double scale) {
  std::optional<Interval> s;
  if (f.support_hint) {
    double a = f.support_hint->a / scale, b = f.support_hint->b / scale;
    s = Interval{std::min(a, b), std::max(a, b)};
  }
  auto ev = f.evaluator;
  auto dv = f.derivative_evaluator;
  TestFunction out;
  out.label = f.label + "*" + std::to_string(scale);
  out.support_hint = s;
  out.evaluator = [ev, scale](double u) { return ev(scale * u); };
  out.derivative_evaluator = [dv, scale](double u) { return scale * dv(scale * u); };
  return out;
}

TestFunction tabulated(std::vector<double> u, std::vector<double> f, std::string label) {
  if (u.size() != f.size() || u.size() < 3)
    throw Error(Errc::invalid_argument, "tabulated function needs >= 3 (u, f) pairs");
  for (std::size_t i = 1; i < u.size(); ++i)
    if (!(u[i] > u[i - 1])) throw Error(Errc::invalid_argument, "table abscissae must increase");
  std::shared_ptr<gsl_spline> sp(gsl_spline_alloc(gsl_interp_cspline, u.size()), &gsl_spline_free);
  gsl_spline_init(sp.get(), u.data(), f.data(), u.size());
  Interval s{u.front(), u.back()};
  return make_test_function(
      std::move(label), [sp](double x) { return gsl_spline_eval(sp.get(), x, nullptr); },
      [sp](double x) { return gsl_spline_eval_deriv(sp.get(), x, nullptr); }, s);
}

TestFunction load_function_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::io, "cannot open " + path);
  std::vector<double> u, f;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream ss(line);
    double a, b;
    if (!(ss >> a >> b)) {
      if (u.empty()) continue;  // header row
      throw Error(Errc::io, path + ":" + std::to_string(lineno) + ": expected two numbers");
    }
    u.push_back(a);
    f.push_back(b);
  }
  return tabulated(std::move(u), std::move(f), path);
}

TestFunction function_by_name(const std::string& name) {
  if (name == "bump") return bump();
  if (name == "odd-bump") return odd_bump();
  if (name == "cauchy") return cauchy();
  return load_function_csv(name);
}

double moment(const TestFunction& f, int k, const quad::Spec& spec) {
  if (k < 0) throw Error(Errc::invalid_argument, "moment order must be nonnegative");
  auto g = [&f, k](double u) { return std::pow(u, k) * f(u); };
  if (f.support_hint)
    return quad::integral(g, f.support_hint->a, f.support_hint->b, spec);
  require_decay(g, 2.0, "moment");
  return quad::integral(g, -kInf, kInf, spec);
}

std::complex<double> fourier_at(const TestFunction& f, double omega, const quad::Spec& spec) {
  const double norm = 1.0 / std::sqrt(2 * M_PI);
  const auto& ev = f.evaluator;
  if (f.support_hint) {
    double a = f.support_hint->a, b = f.support_hint->b;
    double re = quad::oscillatory(ev, a, b, omega, false, spec);
    double im = -quad::oscillatory(ev, a, b, omega, true, spec);
    return norm * std::complex<double>(re, im);
  }
  require_decay(ev, 1.0, "fourier transform");
  if (omega == 0.0) return norm * quad::integral(ev, -kInf, kInf, spec);
  quad::Fn even = [&ev](double x) { return ev(x) + ev(-x); };
  quad::Fn odd = [&ev](double x) { return ev(x) - ev(-x); };
  double re = quad::oscillatory_tail(even, 0.0, omega, false, spec);
  double im = -quad::oscillatory_tail(odd, 0.0, omega, true, spec);
  return norm * std::complex<double>(re, im);
}

GridFunction fourier_transform(const TestFunction& f, const FrequencyGrid& grid,
                               const quad::Spec& spec) {
  if (!(grid.step > 0) || grid.hi < grid.lo)
    throw Error(Errc::invalid_argument, "frequency grid needs step > 0 and hi >= lo");
  GridFunction out;
  out.lo = grid.lo;
  out.step = grid.step;
  std::size_t count = static_cast<std::size_t>(std::floor((grid.hi - grid.lo) / grid.step + 1e-9)) + 1;
  out.hi = grid.lo + grid.step * static_cast<double>(count - 1);
  out.values.reserve(count);
  for (std::size_t i = 0; i < count; ++i) out.values.push_back(fourier_at(f, out.point(i), spec));
  return out;
}

double spectral_integral(const TestFunction& f, const std::function<double(double)>& weight,
                         const quad::Spec& spec) {
  quad::Spec inner = tight(spec);
  auto g = [&](double w) {
    double wt = weight(w);
    if (wt == 0.0) return 0.0;
    return std::norm(fourier_at(f, w, inner)) * wt;
  };
  return 2.0 * quad::integral(g, 0.0, kInf, spec);
}

TestFunction poisson_smooth(const TestFunction& f, double tau) {
  if (!(tau > 0)) throw Error(Errc::nonpositive_tau, "poisson_smooth needs tau > 0");
  auto ev = f.evaluator;
  auto sup = f.support_hint;
  auto conv = [ev, sup, tau](double x, bool deriv) {
    quad::Spec spec;
    spec.epsabs = 1e-13;
    spec.epsrel = 1e-11;
    auto g = [&](double y) {
      double d = x - y, den = d * d + tau * tau;
      double k = deriv ? -2 * tau * d / (M_PI * den * den) : tau / (M_PI * den);
      return ev(y) * k;
    };
    std::vector<double> br{x - tau, x, x + tau};
    if (sup) return quad::integral(g, sup->a, sup->b, spec, br);
    return quad::integral(g, -kInf, kInf, spec, br);
  };
  std::string label = "P_" + std::to_string(tau) + "(" + f.label + ")";
  return make_test_function(
      label, [conv](double x) { return conv(x, false); }, [conv](double x) { return conv(x, true); });
}

double l2_norm_sq(const TestFunction& f, const quad::Spec& spec) {
  auto g = [&f](double u) { double v = f(u); return v * v; };
  if (f.support_hint) return quad::integral(g, f.support_hint->a, f.support_hint->b, spec);
  require_decay(g, 2.0, "l2 norm");
  return quad::integral(g, -kInf, kInf, spec);
}

double weighted_difference_integral(const TestFunction& f,
                                    const std::function<double(double)>& weight,
                                    const std::function<double(double, double)>& outside_tail,
                                    const quad::Spec& spec, double weight_scale) {
  quad::Spec inner = tight(spec);
  // breakpoints where a narrow weight changes shape
  auto inner_breaks = [weight_scale](double u) {
    std::vector<double> br;
    if (weight_scale > 0)
      for (double k : {1.0, 10.0, 100.0}) br.push_back(u - k * weight_scale);
    return br;
  };
  auto dq = [&f](double u, double v) {
    double d = u - v;
    if (std::abs(d) < 1e-6 * std::max(1.0, std::abs(u)))
      return f.derivative(0.5 * (u + v));
    return (f(u) - f(v)) / d;
  };
  // the integrand is symmetric in (u, v): integrate v < u and double
  if (f.support_hint) {
    double a = f.support_hint->a, b = f.support_hint->b;
    auto outer = [&](double u) {
      auto in = [&](double v) { double q = dq(u, v); return q * q * weight(u - v); };
      double s = quad::integral(in, a, u, inner, inner_breaks(u));
      double fu = f(u);
      return 2.0 * (s + fu * fu * (outside_tail(u - a, a) + outside_tail(b - u, b)));
    };
    return quad::integral(outer, a, b, spec);
  }
  auto outer = [&](double u) {
    auto in = [&](double v) { double q = dq(u, v); return q * q * weight(u - v); };
    return 2.0 * quad::integral(in, -kInf, u, inner, inner_breaks(u));
  };
  return quad::integral(outer, -kInf, kInf, spec);
}

double sobolev_half_seminorm_sq(const TestFunction& f, const quad::Spec& spec) {
  if (!f.support_hint) {
    // growing f has an infinite seminorm
    require_decay(f.evaluator, 0.0, "sobolev seminorm");
  }
  return weighted_difference_integral(
      f, [](double) { return 1.0; }, [](double d, double) { return 1.0 / d; }, spec);
}

double weighted_lipschitz_norm(const TestFunction& f, const PairGridSpec& grid) {
  if (grid.points < 2 || !(grid.hi > grid.lo))
    throw Error(Errc::invalid_argument, "pair grid needs >= 2 points and hi > lo");
  auto wt = [](double x) { return std::sqrt(1 + x * x); };
  auto pair = [&](double x, double fx, double y, double fy) {
    return wt(x) * wt(y) * std::abs(fx - fy) / std::abs(x - y);
  };
  const int m = grid.points;
  const double h = (grid.hi - grid.lo) / (m - 1);
  std::vector<double> xs(m), fs(m);
  for (int i = 0; i < m; ++i) {
    xs[i] = grid.lo + h * i;
    fs[i] = f(xs[i]);
  }
  double best = 0.0, bx = xs[0], by = xs[0];
  bool diag = false;
  for (int i = 0; i < m; ++i) {
    double dv = (1 + xs[i] * xs[i]) * std::abs(f.derivative(xs[i]));
    if (dv > best) { best = dv; bx = by = xs[i]; diag = true; }
    for (int j = i + 1; j < m; ++j) {
      double v = pair(xs[i], fs[i], xs[j], fs[j]);
      if (v > best) { best = v; bx = xs[i]; by = xs[j]; diag = false; }
    }
  }
  // local refinement around the best pair
  const int r = std::max(3, grid.refine_points);
  const double hr = 2.0 * h / (r - 1);
  std::vector<double> ux(r), uy(r), fx(r), fy(r);
  for (int i = 0; i < r; ++i) {
    ux[i] = bx - h + hr * i;
    uy[i] = by - h + hr * i;
    fx[i] = f(ux[i]);
    fy[i] = f(uy[i]);
  }
  for (int i = 0; i < r; ++i) {
    if (diag) best = std::max(best, (1 + ux[i] * ux[i]) * std::abs(f.derivative(ux[i])));
    for (int j = 0; j < r; ++j) {
      if (ux[i] == uy[j]) continue;
      best = std::max(best, pair(ux[i], fx[i], uy[j], fy[j]));
    }
  }
  return best;
}

}  // namespace meso
