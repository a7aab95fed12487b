// Contour quadrature for K_n(x,y) and the integrable parts phi_j, psi_j.
//
// Gamma is the vertical line through the x-anchor; Sigma is a union of
// pieces through the y-anchor (a hyperbola when F_n' has a complex zero,
// otherwise curves opening left/right through the real local maxima next to
// the real local minimum). Where Sigma crosses Gamma the residue of 1/(w-z)
// contributes 2 pi i int_{c-ih}^{c+ih} G H dz, and G H is an exponential.

#include <algorithm>
#include <cmath>
#include <limits>

#include "meso/error.hpp"
#include "meso/kernel.hpp"

namespace meso {

namespace detail {

namespace {

constexpr double kSqrt3 = 1.7320508075688772935;
const cplx I1(0.0, 1.0);

enum class AnchorKind { complex_saddle, real_min };

struct Anchors {
  AnchorKind kind = AnchorKind::complex_saddle;
  cplx point;
  bool has_left = false, has_right = false;
  double left_max = 0.0, right_max = 0.0;
};

Anchors find_anchors(const KernelContext& ctx, double x) {
  auto roots = critical_points(ctx, x);
  Anchors a;
  for (const auto& r : roots)
    if (std::abs(r.imag()) > 1e-7 * (1.0 + std::abs(r.real()))) {
      a.kind = AnchorKind::complex_saddle;
      a.point = cplx(r.real(), std::abs(r.imag()));
      return a;
    }
  a.kind = AnchorKind::real_min;
  double best = -std::numeric_limits<double>::infinity();
  std::vector<double> maxima;
  for (const auto& r : roots) {
    double f2 = f_n_second(ctx, r.real(), x).real();
    if (f2 > 0 && f2 > best) {
      best = f2;
      a.point = r.real();
    }
  }
  if (!(best > 0)) throw Error(Errc::non_convergence, "no real local minimum of F_n found");
  const double m = a.point.real();
  for (const auto& r : roots)
    if (r.real() != m) maxima.push_back(r.real());
  const auto& xi = ctx.xi.points;
  if (xi.front() < m) {
    double lm = -std::numeric_limits<double>::infinity();
    for (double v : maxima)
      if (v < m) lm = std::max(lm, v);
    if (!std::isfinite(lm) || lm < xi.front())
      throw Error(Errc::non_convergence, "missing local maximum left of the minimum");
    a.has_left = true;
    a.left_max = lm;
  }
  if (xi.back() > m) {
    double rm = std::numeric_limits<double>::infinity();
    for (double v : maxima)
      if (v > m) rm = std::min(rm, v);
    if (!std::isfinite(rm) || rm > xi.back())
      throw Error(Errc::non_convergence, "missing local maximum right of the minimum");
    a.has_right = true;
    a.right_max = rm;
  }
  return a;
}

double log_scale_at(const KernelContext& ctx, cplx a, double x) {
  cplx d = ctx.q * a - x;
  double v = ctx.kappa * (d * d).real();
  for (double p : ctx.xi.points) v += std::log(std::abs(a - p));
  return v;
}

// All rules are GL32 panels; `edges` is sorted and each interval is cut into panels no longer than h.
void panel_edges(std::vector<double> edges, double h, std::vector<double>& out) {
  std::sort(edges.begin(), edges.end());
  edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
  out.clear();
  for (std::size_t i = 0; i + 1 < edges.size(); ++i) {
    double a = edges[i], b = edges[i + 1];
    int m = std::max(1, static_cast<int>(std::ceil((b - a) / h)));
    for (int k = 0; k < m; ++k) out.push_back(a + (b - a) * k / m);
  }
  out.push_back(edges.back());
}

}  // namespace

struct XSide {
  double x = 0.0;
  double c = 0.0;      // log scale
  double line = 0.0;   // Re w on Gamma
  double width = 0.0;  // Gaussian width along Gamma
  double vmax = 0.0;
  std::vector<double> v, wt;
  std::vector<cplx> g;
  double l1 = 0.0;
};

enum class PieceKind { upper, lower, left_open, right_open };

struct Piece {
  PieceKind kind;
  double a;
  double b;  // Im of the anchor for hyperbolas, curvature scale otherwise

  cplx z(double u) const {
    switch (kind) {
      case PieceKind::upper: return {a - u, std::sqrt(u * u / 3 + b * b)};
      case PieceKind::lower: return {a + u, -std::sqrt(u * u / 3 + b * b)};
      case PieceKind::left_open: return {a - kSqrt3 * (std::hypot(u, b) - b), u};
      case PieceKind::right_open: return {a + kSqrt3 * (std::hypot(u, b) - b), -u};
    }
    return {};
  }
  cplx dz(double u) const {
    switch (kind) {
      case PieceKind::upper: return {-1.0, (u / 3) / std::sqrt(u * u / 3 + b * b)};
      case PieceKind::lower: return {1.0, -(u / 3) / std::sqrt(u * u / 3 + b * b)};
      case PieceKind::left_open: return {-kSqrt3 * u / std::hypot(u, b), 1.0};
      case PieceKind::right_open: return {kSqrt3 * u / std::hypot(u, b), -1.0};
    }
    return {};
  }
  // Parameters where Re z = c, and the height of the crossing above the real axis.
  std::vector<double> crossings(double c, double& h) const {
    switch (kind) {
      case PieceKind::upper:
        h = std::sqrt((a - c) * (a - c) / 3 + b * b);
        return {a - c};
      case PieceKind::lower:
        h = std::sqrt((a - c) * (a - c) / 3 + b * b);
        return {c - a};
      case PieceKind::left_open:
      case PieceKind::right_open: {
        double d = kind == PieceKind::left_open ? a - c : c - a;
        if (!(d > 0)) return {};
        double r = b + d / kSqrt3;
        h = std::sqrt(r * r - b * b);
        return {-h, h};
      }
    }
    return {};
  }
  // Whether this piece owns a residue segment (the hyperbola counts once).
  bool owns_segment() const { return kind != PieceKind::lower; }
};

struct YSide {
  double y = 0.0;
  double c = 0.0;
  double width = 0.0;
  std::vector<Piece> pieces;
};

namespace {

cplx g_tilde(const KernelContext& ctx, double x, double c, cplx w) {
  cplx d = ctx.q * w - x;
  cplx prod = 1.0;
  for (double p : ctx.xi.points) prod *= (w - p);
  return std::exp(ctx.kappa * d * d - c) * prod;
}

cplx g_tilde_without(const KernelContext& ctx, double x, double c, cplx w, int skip) {
  cplx d = ctx.q * w - x;
  cplx prod = 1.0;
  for (int j = 0; j < ctx.n; ++j)
    if (j != skip) prod *= (w - ctx.xi.points[j]);
  return std::exp(ctx.kappa * d * d - c) * prod;
}

double log_abs_g(const KernelContext& ctx, double x, double c, cplx w) {
  cplx d = ctx.q * w - x;
  double v = ctx.kappa * (d * d).real() - c;
  for (double p : ctx.xi.points) v += std::log(std::abs(w - p));
  return v;
}

cplx h_tilde(const KernelContext& ctx, double y, double c, cplx z) {
  cplx d = ctx.q * z - y;
  cplx prod = 1.0;
  for (double p : ctx.xi.points) {
    cplx r = z - p;
    if (std::abs(r) < 1e-10) throw Error(Errc::pole_on_contour, "Sigma passes through a pole");
    prod *= r;
  }
  return std::exp(-ctx.kappa * d * d + c) / prod;
}

double log_abs_h(const KernelContext& ctx, double y, double c, cplx z) {
  cplx d = ctx.q * z - y;
  double v = -ctx.kappa * (d * d).real() + c;
  for (double p : ctx.xi.points) v -= std::log(std::abs(z - p));
  return v;
}

double gaussian_width(const KernelContext& ctx) { return 1.0 / (ctx.q * std::sqrt(ctx.kappa)); }

// Finds [lo, hi] along a piece beyond which bound(u) has dropped `cutoff` below its peak.
template <class Bound>
std::pair<double, double> scan_range(Bound bound, double width, double cutoff) {
  double peak = bound(0.0);
  double ends[2];
  for (int side = 0; side < 2; ++side) {
    const double sgn = side ? 1.0 : -1.0;
    double u = 0.0;
    int below = 0;
    int steps = 0;
    while (below < 2) {
      u += sgn * width * std::max(0.5, 0.25 * std::abs(u) / width);
      double b = bound(u);
      peak = std::max(peak, b);
      below = (b < peak - cutoff) ? below + 1 : 0;
      if (++steps > 4000) throw Error(Errc::non_convergence, "contour truncation not found");
    }
    ends[side] = u;
  }
  return {ends[0], ends[1]};
}

struct PanelSum {
  cplx val;
  double abs;
};

template <class F>
PanelSum gl_panel(F& f, double a, double b) {
  const auto& x = quad::gl32_nodes();
  const auto& w = quad::gl32_weights();
  const double h = 0.5 * (b - a), m = 0.5 * (a + b);
  cplx s = 0.0;
  double ab = 0.0;
  for (int i = 0; i < 32; ++i) {
    cplx v = w[i] * f(m + h * x[i]);
    s += v;
    ab += std::abs(v);
  }
  return {s * h, ab * std::abs(h)};
}

template <class F>
cplx refine(F& f, double a, double b, cplx whole, double tol, int depth, int max_depth) {
  const double m = 0.5 * (a + b);
  PanelSum l = gl_panel(f, a, m), r = gl_panel(f, m, b);
  cplx both = l.val + r.val;
  if (std::abs(both - whole) <= tol || depth >= max_depth) return both;
  return refine(f, a, m, l.val, 0.5 * tol, depth + 1, max_depth) +
         refine(f, m, b, r.val, 0.5 * tol, depth + 1, max_depth);
}

// Adaptive GL32 over consecutive panels; tolerance relative to the L1 size of the integral.
template <class F>
cplx adaptive(F& f, const std::vector<double>& edges, double rel_tol, double extra_scale,
              int max_depth) {
  std::vector<PanelSum> first(edges.size() - 1);
  double l1 = extra_scale;
  for (std::size_t i = 0; i + 1 < edges.size(); ++i) {
    first[i] = gl_panel(f, edges[i], edges[i + 1]);
    l1 += first[i].abs;
  }
  const double total = edges.back() - edges.front();
  cplx sum = 0.0;
  for (std::size_t i = 0; i + 1 < edges.size(); ++i) {
    double len = edges[i + 1] - edges[i];
    double tol = std::max(rel_tol * l1 * len / total, 1e-300);
    sum += refine(f, edges[i], edges[i + 1], first[i].val, tol, 0, max_depth);
  }
  return sum;
}

// int_Gamma G(w)/(w-z) dw for z off the line; near the line a Gaussian with the
// same value at z is subtracted and its integral (+-pi i G(z)) added back.
cplx inner_integral(const KernelContext& ctx, const XSide& X, const ContourQuadSpec& spec, cplx z) {
  const double d = X.line - z.real();
  if (std::abs(d) >= X.width) {
    cplx s = 0.0;
    for (std::size_t k = 0; k < X.v.size(); ++k) s += X.wt[k] * X.g[k] / (cplx(X.line, X.v[k]) - z);
    return I1 * s;
  }
  const double lam = ctx.kappa * ctx.q * ctx.q;
  const cplx gz = g_tilde(ctx, X.x, X.c, z);
  const double lg = std::log(std::abs(gz) + 1e-300);
  const double W = std::sqrt((spec.log_cutoff + std::max(0.0, lg) + lam * d * d) / lam);
  const double lo = std::min(-X.vmax, z.imag() - W), hi = std::max(X.vmax, z.imag() + W);
  std::vector<double> edges;
  panel_edges({lo, z.imag(), hi}, X.width * spec.panel_scale, edges);
  const auto& gx = quad::gl32_nodes();
  const auto& gw = quad::gl32_weights();
  cplx s = 0.0;
  for (std::size_t p = 0; p + 1 < edges.size(); ++p) {
    const double a = edges[p], b = edges[p + 1], h = 0.5 * (b - a), m = 0.5 * (a + b);
    for (int i = 0; i < 32; ++i) {
      const double v = m + h * gx[i];
      const cplx w(X.line, v), dw = w - z;
      s += gw[i] * h * (g_tilde(ctx, X.x, X.c, w) - gz * std::exp(lam * dw * dw)) / dw;
    }
  }
  const double sgn = d > 0 ? 1.0 : (d < 0 ? -1.0 : 0.0);
  return I1 * s + sgn * M_PI * I1 * gz;
}

}  // namespace

std::shared_ptr<const XSide> build_xside(const KernelContext& ctx, const ContourQuadSpec& spec,
                                         double x) {
  Anchors an = find_anchors(ctx, x);
  auto X = std::make_shared<XSide>();
  X->x = x;
  X->c = log_scale_at(ctx, an.point, x);
  X->line = an.point.real();
  X->width = gaussian_width(ctx);
  const double v0 = an.kind == AnchorKind::complex_saddle ? an.point.imag() : 0.0;
  double V = v0;
  for (int k = 1;; ++k) {
    V += X->width * std::max(0.5, 0.25 * (V - v0) / X->width);
    if (log_abs_g(ctx, x, X->c, cplx(X->line, V)) < -spec.log_cutoff) break;
    if (k > 4000) throw Error(Errc::non_convergence, "Gamma truncation not found");
  }
  X->vmax = V;
  std::vector<double> edges;
  std::vector<double> br{-V, V, 0.0};
  if (v0 > 0) {
    br.push_back(-v0);
    br.push_back(v0);
  }
  panel_edges(br, X->width * spec.panel_scale, edges);
  const auto& gx = quad::gl32_nodes();
  const auto& gw = quad::gl32_weights();
  for (std::size_t p = 0; p + 1 < edges.size(); ++p) {
    const double a = edges[p], b = edges[p + 1], h = 0.5 * (b - a), m = 0.5 * (a + b);
    for (int i = 0; i < 32; ++i) {
      double v = m + h * gx[i];
      X->v.push_back(v);
      X->wt.push_back(gw[i] * h);
      X->g.push_back(g_tilde(ctx, x, X->c, cplx(X->line, v)));
      X->l1 += gw[i] * h * std::abs(X->g.back());
    }
  }
  return X;
}

std::shared_ptr<const YSide> build_yside(const KernelContext& ctx, double y) {
  Anchors an = find_anchors(ctx, y);
  auto Y = std::make_shared<YSide>();
  Y->y = y;
  Y->c = log_scale_at(ctx, an.point, y);
  Y->width = gaussian_width(ctx);
  if (an.kind == AnchorKind::complex_saddle) {
    Y->pieces.push_back({PieceKind::upper, an.point.real(), an.point.imag()});
    Y->pieces.push_back({PieceKind::lower, an.point.real(), an.point.imag()});
  } else {
    if (an.has_left) Y->pieces.push_back({PieceKind::left_open, an.left_max, Y->width});
    if (an.has_right) Y->pieces.push_back({PieceKind::right_open, an.right_max, Y->width});
  }
  return Y;
}

namespace {

cplx piece_integral_with_gamma(const KernelContext& ctx, const ContourQuadSpec& spec,
                               const XSide& X, const YSide& Y, const Piece& P, double seg_scale) {
  auto f = [&](double u) {
    cplx z = P.z(u);
    return h_tilde(ctx, Y.y, Y.c, z) * inner_integral(ctx, X, spec, z) * P.dz(u);
  };
  auto bound = [&](double u) {
    cplx z = P.z(u);
    double dist = std::abs(z.real() - X.line);
    double gi = X.l1 / std::max(dist, X.width);
    if (dist < X.width) gi += M_PI * std::exp(log_abs_g(ctx, X.x, X.c, z));
    return log_abs_h(ctx, Y.y, Y.c, z) + std::log(gi + 1e-300);
  };
  auto [lo, hi] = scan_range(bound, Y.width, spec.log_cutoff);
  double h;
  std::vector<double> br{lo, hi, 0.0};
  for (double u : P.crossings(X.line, h))
    if (u > lo && u < hi) br.push_back(u);
  std::vector<double> edges;
  panel_edges(br, 2.0 * Y.width * spec.panel_scale, edges);
  return adaptive(f, edges, spec.rel_tol, seg_scale, spec.max_depth);
}

}  // namespace

double evaluate(const KernelContext& ctx, const ContourQuadSpec& spec, const XSide& X,
                const YSide& Y) {
  const double x = X.x, y = Y.y;
  const double A = 2.0 * ctx.kappa * ctx.q * (y - x);
  const double B = -ctx.kappa * (y - x) * (x + y) - X.c + Y.c;
  cplx seg = 0.0;
  for (const auto& P : Y.pieces) {
    double h = 0.0;
    if (!P.owns_segment() || P.crossings(X.line, h).empty()) continue;
    const double Ah = A * h;
    cplx part = std::abs(Ah) < 1e-8 ? cplx(0.0, 2.0 * h) : cplx(0.0, 2.0 * std::sin(Ah) / A);
    seg += 2.0 * M_PI * I1 * std::exp(A * X.line + B) * part;
  }
  cplx V = seg;
  for (const auto& P : Y.pieces) V += piece_integral_with_gamma(ctx, spec, X, Y, P, std::abs(seg));
  const double pref = -ctx.q * ctx.n / (2.0 * M_PI * M_PI * ctx.s);
  return pref * V.real();
}

double phi_part(const KernelContext& ctx, const XSide& X, int j) {
  cplx s = 0.0;
  if (j == 0) {
    for (std::size_t k = 0; k < X.v.size(); ++k) s += X.wt[k] * X.g[k];
    s *= std::sqrt(2.0 * ctx.n * ctx.q * ctx.q / ctx.s);
  } else {
    for (std::size_t k = 0; k < X.v.size(); ++k)
      s += X.wt[k] * g_tilde_without(ctx, X.x, X.c, cplx(X.line, X.v[k]), j - 1);
  }
  // (1/2 pi i) int ... i dv
  return s.real() / (2.0 * M_PI);
}

double psi_part(const KernelContext& ctx, const ContourQuadSpec& spec, const YSide& Y, int j) {
  cplx total = 0.0;
  for (const auto& P : Y.pieces) {
    auto f = [&](double u) {
      cplx z = P.z(u);
      cplx v = h_tilde(ctx, Y.y, Y.c, z) * P.dz(u);
      return j == 0 ? v : v / (z - ctx.xi.points[j - 1]);
    };
    auto bound = [&](double u) { return log_abs_h(ctx, Y.y, Y.c, P.z(u)); };
    auto [lo, hi] = scan_range(bound, Y.width, spec.log_cutoff);
    std::vector<double> edges;
    panel_edges({lo, hi, 0.0}, 2.0 * Y.width * spec.panel_scale, edges);
    total += adaptive(f, edges, spec.rel_tol, 0.0, spec.max_depth);
  }
  cplx v = total / (2.0 * M_PI * I1);
  if (j == 0) return std::sqrt(2.0 * ctx.n * ctx.q * ctx.q / ctx.s) * v.real();
  return -v.real();
}

}  // namespace detail

KernelEvaluator::KernelEvaluator(KernelContext ctx, ContourQuadSpec spec)
    : ctx_(std::move(ctx)), spec_(spec) {
  if (ctx_.n > spec_.n_max)
    throw Error(Errc::invalid_argument, "kernel quadrature is limited to n <= n_max");
}

KernelEvaluator::~KernelEvaluator() = default;

std::shared_ptr<const detail::XSide> KernelEvaluator::xside(double x) const {
  {
    std::lock_guard<std::mutex> lk(mu_);
    auto it = xs_.find(x);
    if (it != xs_.end()) return it->second;
  }
  auto X = detail::build_xside(ctx_, spec_, x);
  std::lock_guard<std::mutex> lk(mu_);
  xs_.emplace(x, X);
  return X;
}

std::shared_ptr<const detail::YSide> KernelEvaluator::yside(double y) const {
  {
    std::lock_guard<std::mutex> lk(mu_);
    auto it = ys_.find(y);
    if (it != ys_.end()) return it->second;
  }
  auto Y = detail::build_yside(ctx_, y);
  std::lock_guard<std::mutex> lk(mu_);
  ys_.emplace(y, Y);
  return Y;
}

double KernelEvaluator::operator()(double x, double y) const {
  return detail::evaluate(ctx_, spec_, *xside(x), *yside(y));
}

double KernelEvaluator::log_scale(double x) const { return xside(x)->c; }

double KernelEvaluator::phi(double x, int j) const {
  if (j < 0 || j > ctx_.n) throw Error(Errc::invalid_argument, "index j must lie in 0..n");
  return detail::phi_part(ctx_, *xside(x), j);
}

double KernelEvaluator::psi(double y, int j) const {
  if (j < 0 || j > ctx_.n) throw Error(Errc::invalid_argument, "index j must lie in 0..n");
  return detail::psi_part(ctx_, spec_, *yside(y), j);
}

}  // namespace meso
