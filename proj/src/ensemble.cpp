#include "meso/ensemble.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include <lapack.h>

#include "meso/error.hpp"

namespace meso {

using cplx = std::complex<double>;

SimParams make_params(int n, double alpha, double gamma, double tau, double x_star) {
  if (n < 1) throw Error(Errc::invalid_argument, "n must be >= 1");
  if (!(alpha > 0.0 && alpha < 1.0)) throw Error(Errc::invalid_argument, "alpha must lie in (0,1)");
  if (!(gamma > 0.0 && gamma < 1.0)) throw Error(Errc::invalid_argument, "gamma must lie in (0,1)");
  if (!(tau > 0.0)) throw Error(Errc::nonpositive_tau, "tau must be positive");
  if (!(std::abs(x_star) < kEdge)) throw Error(Errc::domain, "x_star must lie in the bulk");
  SimParams p;
  p.n = n;
  p.alpha = alpha;
  p.gamma = gamma;
  p.tau = tau;
  p.x_star = x_star;
  p.t = tau / (std::pow(static_cast<double>(n), gamma) * std::sqrt(2.0 - x_star * x_star));
  p.q = std::exp(-p.t);
  return p;
}

void fill_gue(HermitianMatrix& X, Rng& rng) {
  const int n = X.n;
  std::normal_distribution<double> nd(0.0, std::sqrt(1.0 / (2.0 * n)));
  std::normal_distribution<double> no(0.0, std::sqrt(1.0 / (4.0 * n)));
  for (int j = 0; j < n; ++j) {
    X(j, j) = cplx(nd(rng), 0.0);
    for (int i = j + 1; i < n; ++i) {
      double re = no(rng), im = no(rng);
      X(i, j) = cplx(re, im);
      X(j, i) = cplx(re, -im);
    }
  }
}

HermitianMatrix sample_gue(int n, std::uint64_t seed, std::uint64_t trial) {
  if (n < 1) throw Error(Errc::invalid_argument, "n must be >= 1");
  HermitianMatrix X(n);
  Rng rng = make_rng(seed, trial, Stream::gue);
  fill_gue(X, rng);
  return X;
}

std::vector<double> tridiagonal_eigenvalues(std::vector<double> d, std::vector<double> e) {
  const int n = static_cast<int>(d.size());
  if (n == 0) return d;
  if (static_cast<int>(e.size()) != n - 1)
    throw Error(Errc::dimension_mismatch, "off-diagonal must have n-1 entries");
  e.push_back(0.0);
  const double eps = std::numeric_limits<double>::epsilon();
  for (int l = 0; l < n; ++l) {
    int iter = 0, m;
    do {
      for (m = l; m < n - 1; ++m) {
        double dd = std::abs(d[m]) + std::abs(d[m + 1]);
        if (std::abs(e[m]) <= eps * dd) break;
      }
      if (m != l) {
        if (iter++ == 60) throw Error(Errc::non_convergence, "implicit QL did not converge");
        double g = (d[l + 1] - d[l]) / (2.0 * e[l]);
        double r = std::hypot(g, 1.0);
        g = d[m] - d[l] + e[l] / (g + std::copysign(r, g));
        double s = 1.0, c = 1.0, p = 0.0;
        int i;
        for (i = m - 1; i >= l; --i) {
          double f = s * e[i], b = c * e[i];
          e[i + 1] = (r = std::hypot(f, g));
          if (r == 0.0) {
            d[i + 1] -= p;
            e[m] = 0.0;
            break;
          }
          s = f / r;
          c = g / r;
          g = d[i + 1] - p;
          r = (d[i] - g) * s + 2.0 * c * b;
          d[i + 1] = g + (p = s * r);
          g = c * r - b;
        }
        if (r == 0.0 && i >= l) continue;
        d[l] -= p;
        e[l] = g;
        e[m] = 0.0;
      }
    } while (m != l);
  }
  std::sort(d.begin(), d.end());
  return d;
}

namespace {

// Householder reduction to real tridiagonal form. The complex off-diagonal
// is replaced by its modulus (a diagonal unitary similarity).
std::vector<double> native_eigenvalues(HermitianMatrix& A) {
  const int n = A.n;
  std::vector<double> d(n), e(n > 1 ? n - 1 : 0);
  std::vector<cplx> v(n), p(n);
  for (int k = 0; k + 2 < n; ++k) {
    const int r0 = k + 1;
    double norm2 = 0.0;
    for (int i = r0; i < n; ++i) norm2 += std::norm(A(i, k));
    double norm = std::sqrt(norm2);
    d[k] = A(k, k).real();
    if (norm == 0.0) {
      e[k] = 0.0;
      continue;
    }
    cplx x0 = A(r0, k);
    double ax0 = std::abs(x0);
    cplx phase = ax0 > 0.0 ? x0 / ax0 : cplx(1.0, 0.0);
    for (int i = r0; i < n; ++i) v[i] = A(i, k);
    v[r0] += phase * norm;
    double beta = 1.0 / (norm * (norm + ax0));  // 2 / |v|^2
    // p = beta A v
    for (int i = r0; i < n; ++i) p[i] = 0.0;
    for (int j = r0; j < n; ++j) {
      const cplx vj = v[j];
      const cplx* col = &A(0, j);
      for (int i = r0; i < n; ++i) p[i] += col[i] * vj;
    }
    cplx vp = 0.0;
    for (int i = r0; i < n; ++i) {
      p[i] *= beta;
      vp += std::conj(v[i]) * p[i];
    }
    const double K = 0.5 * beta * vp.real();
    for (int i = r0; i < n; ++i) p[i] -= K * v[i];  // w
    for (int j = r0; j < n; ++j) {
      const cplx cvj = std::conj(v[j]), cwj = std::conj(p[j]);
      cplx* col = &A(0, j);
      for (int i = r0; i < n; ++i) col[i] -= v[i] * cwj + p[i] * cvj;
    }
    e[k] = norm;  // |alpha|
  }
  if (n >= 2) {
    d[n - 2] = A(n - 2, n - 2).real();
    e[n - 2] = std::abs(A(n - 1, n - 2));
  }
  d[n - 1] = A(n - 1, n - 1).real();
  return tridiagonal_eigenvalues(std::move(d), std::move(e));
}

std::vector<double> lapack_eigenvalues(HermitianMatrix& A) {
  const lapack_int n = A.n;
  std::vector<double> w(n);
  lapack_int info = 0, lwork = -1, lrwork = -1, liwork = -1;
  lapack_complex_double wq;
  double rq;
  lapack_int iq;
  auto* a = reinterpret_cast<lapack_complex_double*>(A.entries.data());
  LAPACK_zheevd_2stage("N", "L", &n, a, &n, w.data(), &wq, &lwork, &rq, &lrwork, &iq, &liwork,
                       &info);
  if (info != 0) throw Error(Errc::non_convergence, "zheevd_2stage workspace query failed");
  lwork = static_cast<lapack_int>(reinterpret_cast<double*>(&wq)[0]);
  lrwork = static_cast<lapack_int>(rq);
  liwork = iq;
  std::vector<cplx> work(std::max<lapack_int>(lwork, 1));
  std::vector<double> rwork(std::max<lapack_int>(lrwork, 1));
  std::vector<lapack_int> iwork(std::max<lapack_int>(liwork, 1));
  LAPACK_zheevd_2stage("N", "L", &n, a, &n, w.data(),
                       reinterpret_cast<lapack_complex_double*>(work.data()), &lwork,
                       rwork.data(), &lrwork, iwork.data(), &liwork, &info);
  if (info != 0) throw Error(Errc::non_convergence, "zheevd_2stage failed");
  return w;
}

}  // namespace

std::vector<double> eigenvalues_inplace(HermitianMatrix& M, EigenBackend backend) {
  if (M.n < 1) throw Error(Errc::dimension_mismatch, "empty matrix");
  if (backend == EigenBackend::automatic)
    backend = M.n < 128 ? EigenBackend::native : EigenBackend::lapack;
  if (M.n == 1) return {M(0, 0).real()};
  return backend == EigenBackend::native ? native_eigenvalues(M) : lapack_eigenvalues(M);
}

Configuration hermitian_eigenvalues(const HermitianMatrix& M, EigenBackend backend) {
  if (M.entries.size() != static_cast<std::size_t>(M.n) * M.n)
    throw Error(Errc::dimension_mismatch, "matrix storage does not match n");
  double scale = 0.0;
  for (const auto& z : M.entries) scale = std::max(scale, std::abs(z));
  for (int j = 0; j < M.n; ++j)
    for (int i = j; i < M.n; ++i)
      if (std::abs(M(i, j) - std::conj(M(j, i))) > 1e-12 * std::max(1.0, scale))
        throw Error(Errc::not_hermitian, "matrix is not Hermitian");
  HermitianMatrix A = M;
  return make_configuration(eigenvalues_inplace(A, backend), ConfigKind::evolved);
}

namespace {

bool strictly_increasing(const std::vector<double>& x) {
  for (std::size_t i = 1; i < x.size(); ++i)
    if (!(x[i] > x[i - 1])) return false;
  return true;
}

std::vector<double> deformed_once(const std::vector<double>& xi, double q, double s, Rng& rng,
                                  EigenBackend backend) {
  const int n = static_cast<int>(xi.size());
  HermitianMatrix M(n);
  fill_gue(M, rng);
  const double rs = std::sqrt(s);
  for (auto& z : M.entries) z *= rs;
  for (int j = 0; j < n; ++j) M(j, j) += q * xi[j];
  auto w = eigenvalues_inplace(M, backend);
  std::sort(w.begin(), w.end());
  return w;
}

}  // namespace

Configuration deformed_gue_eigenvalues_t(const Configuration& xi, double t, std::uint64_t seed,
                                         std::uint64_t trial, EigenBackend backend) {
  if (xi.n() == 0) throw Error(Errc::dimension_mismatch, "empty initial configuration");
  if (!(t >= 0.0)) throw Error(Errc::invalid_argument, "t must be nonnegative");
  if (t == 0.0) return make_configuration(xi.points, ConfigKind::evolved, seed);
  const double q = std::isinf(t) ? 0.0 : std::exp(-t);
  const double s = std::isinf(t) ? 1.0 : -std::expm1(-2.0 * t);
  Rng rng = make_rng(seed, trial, Stream::gue);
  auto w = deformed_once(xi.points, q, s, rng, backend);
  if (!strictly_increasing(w)) {
    // resample once from a disjoint stream
    Rng retry = make_rng(seed, trial, Stream::aux);
    w = deformed_once(xi.points, q, s, retry, backend);
    if (!strictly_increasing(w))
      throw Error(Errc::ordering_violation, "deformed GUE spectrum has a tie");
  }
  return Configuration{std::move(w), ConfigKind::evolved, seed};
}

Configuration deformed_gue_eigenvalues(const Configuration& xi, const SimParams& params,
                                       std::uint64_t seed, std::uint64_t trial,
                                       EigenBackend backend) {
  if (static_cast<int>(xi.n()) != params.n)
    throw Error(Errc::dimension_mismatch, "xi.n differs from params.n");
  return deformed_gue_eigenvalues_t(xi, params.t, seed, trial, backend);
}

int default_sde_steps(int n, double t) {
  return std::max(200, static_cast<int>(std::ceil(40.0 * n * t)));
}

namespace {

struct SdeState {
  const SdeOptions& opts;
  double sqrt_inv_n;
  double inv_n;
  std::vector<double> drift;

  void compute_drift(const std::vector<double>& x) {
    const std::size_t n = x.size();
    for (std::size_t i = 0; i < n; ++i) {
      double r = 0.0;
      if (opts.interaction)
        for (std::size_t j = 0; j < n; ++j)
          if (j != i) r += 1.0 / (x[i] - x[j]);
      drift[i] = -x[i] + inv_n * r;
    }
  }

  // Advances x over dt with increments dB; on an ordering violation the
  // interval is split in two with a Brownian-bridge midpoint.
  bool advance(std::vector<double>& x, double dt, const std::vector<double>& dB, Rng& rng,
               int depth) {
    const std::size_t n = x.size();
    compute_drift(x);
    std::vector<double> y(n);
    for (std::size_t i = 0; i < n; ++i)
      y[i] = x[i] + drift[i] * dt + (opts.noise ? sqrt_inv_n * dB[i] : 0.0);
    if (strictly_increasing(y)) {
      x.swap(y);
      return true;
    }
    if (depth >= opts.max_halvings) return false;
    std::normal_distribution<double> nd(0.0, 1.0);
    std::vector<double> b1(n), b2(n);
    const double h = 0.5 * std::sqrt(dt);
    for (std::size_t i = 0; i < n; ++i) {
      b1[i] = 0.5 * dB[i] + h * nd(rng);
      b2[i] = dB[i] - b1[i];
    }
    return advance(x, 0.5 * dt, b1, rng, depth + 1) && advance(x, 0.5 * dt, b2, rng, depth + 1);
  }
};

}  // namespace

Configuration simulate_dbm_sde_t(const Configuration& xi, double t, int steps, std::uint64_t seed,
                                 std::uint64_t trial, const SdeOptions& opts) {
  if (xi.n() == 0) throw Error(Errc::dimension_mismatch, "empty initial configuration");
  if (steps < 1) throw Error(Errc::invalid_argument, "steps must be positive");
  if (!(t >= 0.0) || std::isinf(t)) throw Error(Errc::invalid_argument, "t must be finite and >= 0");
  std::vector<double> x = xi.points;
  const std::size_t n = x.size();
  // break exact ties
  for (std::size_t i = 1; i < n; ++i)
    if (!(x[i] > x[i - 1])) x[i] = x[i - 1] + 1e-12 * std::max(1.0, std::abs(x[i - 1]));
  SdeState st{opts, std::sqrt(1.0 / n), 1.0 / n, std::vector<double>(n)};
  Rng rng = make_rng(seed, trial, Stream::sde);
  std::normal_distribution<double> nd(0.0, 1.0);
  const double dt = t / steps;
  const double sdt = std::sqrt(dt);
  std::vector<double> dB(n);
  for (int k = 0; k < steps; ++k) {
    for (auto& b : dB) b = sdt * nd(rng);
    if (!st.advance(x, dt, dB, rng, 0))
      throw Error(Errc::ordering_violation, "SDE step rejected after maximal halving");
  }
  return Configuration{std::move(x), ConfigKind::evolved, seed};
}

Configuration simulate_dbm_sde(const Configuration& xi, const SimParams& params, int steps,
                               std::uint64_t seed, std::uint64_t trial, const SdeOptions& opts) {
  if (static_cast<int>(xi.n()) != params.n)
    throw Error(Errc::dimension_mismatch, "xi.n differs from params.n");
  return simulate_dbm_sde_t(xi, params.t, steps, seed, trial, opts);
}

}  // namespace meso
