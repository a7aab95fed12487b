#include "meso/regularity.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <thread>
#include <vector>

#include "meso/error.hpp"
#include "meso/quad.hpp"

namespace meso {

using cplx = std::complex<double>;

double regularity_deviation(const Configuration& xi, cplx w) {
  cplx s = 0.0;
  for (double p : xi.points) s += 1.0 / (w - p);
  const double n = static_cast<double>(xi.n());
  return std::sqrt(w.imag() / n) * std::abs(s - n * stieltjes_u(w));
}

namespace {

struct Best {
  double value = -1.0;
  cplx w;
};

struct Row {
  double im;
  double lo, hi, step;
};

// Evaluates the rows in parallel; every row is split into chunks so threads stay busy.
Best scan(const Configuration& xi, const std::vector<Row>& rows, int jobs, long& count) {
  struct Task {
    const Row* row;
    long first, last;
  };
  std::vector<Task> tasks;
  for (const auto& r : rows) {
    long m = static_cast<long>(std::floor((r.hi - r.lo) / r.step + 1e-9)) + 1;
    count += m;
    for (long k = 0; k < m; k += 512) tasks.push_back({&r, k, std::min(m, k + 512)});
  }
  std::vector<Best> best(jobs);
  std::vector<std::thread> pool;
  std::atomic<std::size_t> next{0};
  for (int j = 0; j < jobs; ++j)
    pool.emplace_back([&, j] {
      for (std::size_t i; (i = next++) < tasks.size();) {
        const Task& t = tasks[i];
        for (long k = t.first; k < t.last; ++k) {
          cplx w(t.row->lo + k * t.row->step, t.row->im);
          double v = regularity_deviation(xi, w);
          if (v > best[j].value) best[j] = {v, w};
        }
      }
    });
  for (auto& th : pool) th.join();
  Best out;
  for (const auto& b : best)
    if (b.value > out.value || (b.value == out.value && b.w.real() < out.w.real())) out = b;
  return out;
}

}  // namespace

RegularityReport check_regularity(const Configuration& xi, std::optional<Interval> U, double A,
                                  double delta, const NetSpec& grid) {
  if (xi.n() == 0) throw Error(Errc::invalid_argument, "empty configuration");
  if (!(A > 0)) throw Error(Errc::invalid_argument, "A must be positive");
  if (grid.levels < 1 || !(grid.max_spacing > 0)) throw Error(Errc::invalid_argument, "empty grid");
  const double n = static_cast<double>(xi.n());
  const double a = A * std::pow(n, delta);

  // far field: Im w >= n/(4A^2 n^{2 delta}) or |Re w| >= sqrt2 + n/(A^2 n^{2 delta})
  const double im_far = n / (4.0 * A * A * std::pow(n, 2 * delta));
  const double re_far = kEdge + n / (A * A * std::pow(n, 2 * delta));
  double lo = -grid.re_margin, hi = grid.re_margin;
  if (U) {
    lo = std::max(lo, U->a);
    hi = std::min(hi, U->b);
  }
  lo = std::max(lo, -re_far);
  hi = std::min(hi, re_far);
  const double im_lo = 1.0 / n, im_hi = std::min(1.0, im_far);

  RegularityReport rep;
  rep.threshold = a;
  if (!(hi >= lo) || !(im_hi >= im_lo)) {
    rep.passed = true;  // the whole region is far field
    return rep;
  }
  const int jobs = grid.jobs > 0 ? grid.jobs : std::max(1u, std::thread::hardware_concurrency());

  std::vector<Row> rows;
  const int L = grid.levels;
  for (int k = 0; k < L; ++k) {
    double im = L == 1 ? im_lo : im_lo * std::pow(im_hi / im_lo, static_cast<double>(k) / (L - 1));
    double step = std::min(grid.max_spacing, im / 4.0);
    rows.push_back({im, lo, hi, step});
  }
  long count = 0;
  Best b = scan(xi, rows, jobs, count);

  // refine around the argmax: finer Re spacing and intermediate Im levels
  if (grid.refine_factor > 1) {
    const double im0 = b.w.imag();
    const double step0 = std::min(grid.max_spacing, im0 / 4.0);
    const double ratio = L > 1 ? std::pow(im_hi / im_lo, 1.0 / (L - 1)) : 1.0;
    std::vector<Row> fine;
    const int R = grid.refine_factor;
    for (int k = -R; k <= R; ++k) {
      double im = im0 * std::pow(ratio, static_cast<double>(k) / R);
      if (im < im_lo || im > im_hi) continue;
      double step = std::min(grid.max_spacing, im / 4.0) / R;
      fine.push_back({im, std::max(lo, b.w.real() - 2 * step0), std::min(hi, b.w.real() + 2 * step0), step});
    }
    Best f = scan(xi, fine, jobs, count);
    if (f.value > b.value) b = f;
  }
  rep.sup_value = b.value;
  rep.argmax_w = b.w;
  rep.grid_size = count;
  rep.passed = rep.sup_value <= a;
  return rep;
}

cplx xp_semicircle_term(int p, double t) {
  if (p < 0) throw Error(Errc::invalid_argument, "p must be nonnegative");
  if (!(t > 0)) throw Error(Errc::invalid_argument, "t must be positive");
  const cplx w0(0.0, std::sinh(t) * kEdge);
  // x = sqrt2 sin(theta): (1/pi) int 2 cos^2(theta) (w0 - x)^{-(p+1)} dtheta
  auto f = [&](double th, bool im) {
    cplx v = 2.0 * std::cos(th) * std::cos(th) / std::pow(w0 - kEdge * std::sin(th), p + 1);
    return im ? v.imag() : v.real();
  };
  quad::Spec spec;
  spec.epsabs = 1e-14;
  spec.epsrel = 1e-12;
  const double h = M_PI / 2;
  double re = quad::integral([&](double th) { return f(th, false); }, -h, h, spec, {0.0});
  double im = quad::integral([&](double th) { return f(th, true); }, -h, h, spec, {0.0});
  return cplx(re, im) / M_PI;
}

cplx xp_statistic(const Configuration& xi, int p, double t) {
  if (xi.n() == 0) throw Error(Errc::invalid_argument, "empty configuration");
  const cplx w0(0.0, std::sinh(t) * kEdge);
  cplx s = 0.0;
  for (double x : xi.points) s += 1.0 / std::pow(w0 - x, p + 1);
  return s / static_cast<double>(xi.n()) - xp_semicircle_term(p, t);
}

}  // namespace meso
