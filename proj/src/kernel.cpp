#include "meso/kernel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "meso/error.hpp"

namespace meso {

KernelContext make_kernel_context(const Configuration& xi, double t) {
  if (xi.n() == 0) throw Error(Errc::dimension_mismatch, "empty configuration");
  if (!(t > 0.0) || !std::isfinite(t)) throw Error(Errc::invalid_argument, "t must be positive and finite");
  KernelContext c;
  c.xi = xi;
  std::sort(c.xi.points.begin(), c.xi.points.end());
  c.t = t;
  c.q = std::exp(-t);
  c.s = -std::expm1(-2.0 * t);
  c.n = static_cast<int>(xi.n());
  c.kappa = c.n / c.s;
  return c;
}

cplx f_n(const KernelContext& ctx, cplx w, double x) {
  if (w.imag() == 0.0 && w.real() <= ctx.xi.points.back())
    throw Error(Errc::branch_cut, "F_n evaluated on (-inf, max xi]");
  cplx a = ctx.q * w - x;
  cplx sum = 0.0;
  for (double p : ctx.xi.points) sum += std::log(w - p);
  return a * a + (ctx.s / ctx.n) * sum;
}

cplx f_n_prime(const KernelContext& ctx, cplx w, double x) {
  cplx sum = 0.0;
  for (double p : ctx.xi.points) sum += 1.0 / (w - p);
  return 2.0 * ctx.q * (ctx.q * w - x) + (ctx.s / ctx.n) * sum;
}

cplx f_n_second(const KernelContext& ctx, cplx w, double x) {
  (void)x;
  cplx sum = 0.0;
  for (double p : ctx.xi.points) {
    cplx r = 1.0 / (w - p);
    sum += r * r;
  }
  return 2.0 * ctx.q * ctx.q - (ctx.s / ctx.n) * sum;
}

cplx saddle_limit(double x, double t) {
  if (!(std::abs(x) < kEdge)) throw Error(Errc::domain, "saddle_limit needs |x| < sqrt2");
  if (!(t > 0.0)) throw Error(Errc::invalid_argument, "t must be positive");
  return {x * std::cosh(t), std::sqrt(2.0 - x * x) * std::sinh(t)};
}

SaddleResult saddle_solve(const KernelContext& ctx, double x) {
  cplx w = saddle_limit(x, ctx.t);
  double r = std::abs(f_n_prime(ctx, w, x));
  SaddleResult out;
  for (int it = 1; it <= 100; ++it) {
    cplx f2 = f_n_second(ctx, w, x);
    if (r <= 1e-12 * (1.0 + std::abs(f2))) {
      out.omega = w;
      out.residual = r;
      out.iterations = it - 1;
      out.f_second = f2;
      return out;
    }
    cplx step = f_n_prime(ctx, w, x) / f2;
    double lam = 1.0;
    bool moved = false;
    for (int h = 0; h < 40; ++h, lam *= 0.5) {
      cplx wn = w - lam * step;
      if (!(wn.imag() > 0.0)) continue;
      double rn = std::abs(f_n_prime(ctx, wn, x));
      if (rn < r) {
        w = wn;
        r = rn;
        moved = true;
        break;
      }
    }
    if (!moved) {
      if (!((w - step).imag() > 0.0))
        throw Error(Errc::half_plane_exit, "Newton step leaves the upper half plane");
      break;
    }
  }
  cplx f2 = f_n_second(ctx, w, x);
  if (r <= 1e-12 * (1.0 + std::abs(f2))) return {w, r, 100, f2};
  throw Error(Errc::non_convergence, "saddle Newton iteration did not converge");
}

std::vector<cplx> critical_points(const KernelContext& ctx, double x) {
  const auto& xi = ctx.xi.points;
  const int m = ctx.n + 1;
  double center = x / ctx.q, spread = 0.0;
  for (double p : xi) center += p;
  center /= m;
  for (double p : xi) spread = std::max(spread, std::abs(p - center));
  spread = std::max(spread, std::abs(x / ctx.q - center));
  const double R = 1.0 + spread;
  std::vector<cplx> z(m);
  for (int k = 0; k < m; ++k) z[k] = center + R * std::polar(1.0, 2.0 * M_PI * k / m + 0.4);

  // Aberth-Ehrlich on P(w) = F_n'(w) prod (w - xi_j), using P'/P = F''/F' + sum 1/(w - xi)
  for (int iter = 0; iter < 500; ++iter) {
    double maxcorr = 0.0;
    for (int k = 0; k < m; ++k) {
      cplx f1 = f_n_prime(ctx, z[k], x);
      if (f1 == 0.0) continue;
      cplx ratio = f_n_second(ctx, z[k], x) / f1;
      for (double p : xi) ratio += 1.0 / (z[k] - p);
      cplx N = 1.0 / ratio, S = 0.0;
      for (int j = 0; j < m; ++j)
        if (j != k) S += 1.0 / (z[k] - z[j]);
      cplx corr = N / (1.0 - N * S);
      z[k] -= corr;
      maxcorr = std::max(maxcorr, std::abs(corr) / (1.0 + std::abs(z[k])));
    }
    if (maxcorr < 1e-15) break;
  }
  // polish; nearly real roots are polished on the real line
  for (auto& r : z) {
    bool real = std::abs(r.imag()) <= 1e-7 * (1.0 + std::abs(r.real()));
    if (real) r = r.real();
    for (int it = 0; it < 50; ++it) {
      cplx f1 = f_n_prime(ctx, r, x), f2 = f_n_second(ctx, r, x);
      if (f2 == 0.0) break;
      cplx step = f1 / f2;
      if (real) step = step.real();
      r -= step;
      if (std::abs(step) <= 1e-16 * (1.0 + std::abs(r))) break;
    }
  }
  std::sort(z.begin(), z.end(), [](cplx a, cplx b) {
    return a.real() != b.real() ? a.real() < b.real() : a.imag() < b.imag();
  });
  return z;
}

Interval kernel_support(const KernelContext& ctx) {
  const double m = ctx.s > 0 ? std::sqrt(ctx.s) * (kEdge + 6.5 / std::sqrt(ctx.n)) : 0.0;
  return {ctx.q * ctx.xi.points.front() - m, ctx.q * ctx.xi.points.back() + m};
}

double kernel_eval(const KernelContext& ctx, double x, double y, const ContourQuadSpec& spec) {
  KernelEvaluator K(ctx, spec);
  return K(x, y);
}

IntegrableParts integrable_parts(const KernelEvaluator& K, double x, int j) {
  if (j < 0 || j > K.context().n) throw Error(Errc::invalid_argument, "index j must lie in 0..n");
  return {K.phi(x, j), K.psi(x, j)};
}

IntegrableParts integrable_parts(const KernelContext& ctx, double x, int j) {
  KernelEvaluator K(ctx);
  return integrable_parts(K, x, j);
}

namespace {

quad::Spec kernel_quad() {
  quad::Spec s;
  s.epsabs = 1e-12;
  s.epsrel = 1e-10;
  s.limit = 2000;
  return s;
}

std::vector<double> scaled_points(const KernelContext& ctx, Interval I) {
  std::vector<double> br;
  for (double p : ctx.xi.points) {
    double v = ctx.q * p;
    if (v > I.a && v < I.b) br.push_back(v);
  }
  return br;
}

}  // namespace

double reproducing_residual(const KernelEvaluator& K, double x, double y) {
  Interval I = kernel_support(K.context());
  auto g = [&](double z) { return K(x, z) * K(z, y); };
  double v = quad::integral(g, I.a, I.b, kernel_quad(), scaled_points(K.context(), I));
  return std::abs(v - K(x, y));
}

double reproducing_residual(const KernelContext& ctx, double x, double y) {
  KernelEvaluator K(ctx);
  return reproducing_residual(K, x, y);
}

double r_restricted(const KernelEvaluator& K, Interval I, double x, double y) {
  if (!(I.b >= I.a)) throw Error(Errc::invalid_argument, "interval needs E1 <= E2");
  if (I.b == I.a) return -K(x, y);
  auto g = [&](double z) { return K(x, z) * K(z, y); };
  return quad::integral(g, I.a, I.b, kernel_quad()) - K(x, y);
}

double r_restricted(const KernelContext& ctx, Interval I, double x, double y) {
  KernelEvaluator K(ctx);
  return r_restricted(K, I, x, y);
}

DeterminantalMoments determinantal_moments(const KernelEvaluator& K, const TestFunction& g,
                                           double tol) {
  const Interval I = g.support_hint ? *g.support_hint : kernel_support(K.context());
  DeterminantalMoments out;
  out.mean = quad::integral([&](double x) { return g(x) * K(x, x); }, I.a, I.b, kernel_quad());

  const auto& gx = quad::gl32_nodes();
  const auto& gw = quad::gl32_weights();
  double prev = std::numeric_limits<double>::quiet_NaN();
  for (int panels = 1; panels <= 8; panels *= 2) {
    const int N = 32 * panels;
    std::vector<double> x(N), w(N), gv(N);
    const double h = (I.b - I.a) / panels;
    for (int p = 0; p < panels; ++p)
      for (int i = 0; i < 32; ++i) {
        int k = 32 * p + i;
        x[k] = I.a + h * (p + 0.5 + 0.5 * gx[i]);
        w[k] = 0.5 * h * gw[i];
        gv[k] = g(x[k]);
      }
    double diag = 0.0, off = 0.0;
    for (int i = 0; i < N; ++i) {
      if (gv[i] == 0.0) continue;
      diag += w[i] * gv[i] * gv[i] * K(x[i], x[i]);
      for (int j = i + 1; j < N; ++j) {
        if (gv[j] == 0.0) continue;
        off += 2.0 * w[i] * w[j] * gv[i] * gv[j] * K(x[i], x[j]) * K(x[j], x[i]);
      }
      off += w[i] * w[i] * gv[i] * gv[i] * K(x[i], x[i]) * K(x[i], x[i]);
    }
    double var = diag - off;
    out.variance = var;
    out.nodes = N;
    if (std::abs(var - prev) <= tol * std::max(diag, 1e-300)) return out;
    prev = var;
  }
  throw Error(Errc::non_convergence, "determinantal variance grid did not converge");
}

double determinantal_variance(const KernelContext& ctx, const TestFunction& g) {
  KernelEvaluator K(ctx);
  return determinantal_moments(K, g).variance;
}

Diagnostics regularity_diagnostics(const KernelContext& ctx, double x) {
  const cplx om = saddle_limit(x, ctx.t);
  const double n = ctx.n;
  cplx s1 = 0.0, s2 = 0.0;
  double s3 = 0.0;
  for (double p : ctx.xi.points) {
    cplx r = 1.0 / (om - p);
    s1 += r;
    s2 += r * r;
    s3 += std::pow(std::abs(r), 3);
  }
  const double a = ctx.s / n;
  Diagnostics d;
  d.e1 = std::sqrt(a) * std::abs(s1 - n * stieltjes_u(om));
  d.e2 = a * std::abs(s2 + n * stieltjes_u_prime(om));
  d.e3 = std::pow(a, 1.5) * s3;
  return d;
}

}  // namespace meso
