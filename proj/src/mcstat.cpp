#include "meso/mcstat.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <numeric>
#include <thread>

#include "meso/error.hpp"

namespace meso {

double linear_statistic(const Configuration& x, const TestFunction& f, double alpha, double x_star) {
  const double scale = std::pow(static_cast<double>(x.n()), alpha);
  const auto& p = x.points;
  auto first = p.begin(), last = p.end();
  if (f.support_hint) {
    // points are sorted, so only a window contributes
    first = std::lower_bound(p.begin(), p.end(), x_star + f.support_hint->a / scale);
    last = std::upper_bound(first, p.end(), x_star + f.support_hint->b / scale);
  }
  double s = 0.0;
  for (auto it = first; it != last; ++it) s += f(scale * (*it - x_star));
  return s;
}

double kolmogorov_q(double x) {
  if (x <= 0.0) return 1.0;
  if (x < 1.18) {
    // small-x form: sqrt(2pi)/x sum exp(-(2k-1)^2 pi^2 / (8x^2))
    const double y = -M_PI * M_PI / (8.0 * x * x);
    double s = 0.0;
    for (int k = 1; k <= 8; ++k) s += std::exp((2 * k - 1) * (2 * k - 1) * y);
    return 1.0 - std::sqrt(2.0 * M_PI) / x * s;
  }
  double s = 0.0;
  for (int k = 1; k <= 100; ++k) {
    double term = std::exp(-2.0 * k * k * x * x);
    s += (k % 2 ? 2.0 : -2.0) * term;
    if (term < 1e-300) break;
  }
  return std::clamp(s, 0.0, 1.0);
}

namespace {

double std_normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

double ks_pvalue(double d, double ne) {
  const double r = std::sqrt(ne);
  return kolmogorov_q((r + 0.12 + 0.11 / r) * d);
}

}  // namespace

std::pair<double, double> ks_test(std::vector<double> samples, double (*cdf)(double)) {
  if (samples.empty()) throw Error(Errc::invalid_argument, "empty sample");
  std::sort(samples.begin(), samples.end());
  const double m = static_cast<double>(samples.size());
  double d = 0.0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    double F = cdf(samples[i]);
    d = std::max({d, (i + 1) / m - F, F - i / m});
  }
  return {d, ks_pvalue(d, m)};
}

TwoSampleKs ks_two_sample(std::vector<double> a, std::vector<double> b) {
  if (a.empty() || b.empty()) throw Error(Errc::invalid_argument, "empty sample");
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < a.size() && j < b.size()) {
    double v = std::min(a[i], b[j]);
    while (i < a.size() && a[i] == v) ++i;
    while (j < b.size() && b[j] == v) ++j;
    d = std::max(d, std::abs(i / na - j / nb));
  }
  return {d, ks_pvalue(d, na * nb / (na + nb))};
}

GaussianityReport gaussianity_report(const std::vector<double>& x) {
  if (x.size() < 3) throw Error(Errc::invalid_argument, "need at least 3 samples");
  const double m = static_cast<double>(x.size());
  const double mean = std::accumulate(x.begin(), x.end(), 0.0) / m;
  double m2 = 0, m3 = 0, m4 = 0;
  for (double v : x) {
    double d = v - mean, d2 = d * d;
    m2 += d2;
    m3 += d2 * d;
    m4 += d2 * d2;
  }
  m2 /= m;
  m3 /= m;
  m4 /= m;
  if (!(m2 > 0.0)) throw Error(Errc::degenerate_sample, "zero sample variance");
  GaussianityReport r;
  r.skewness = m3 / std::pow(m2, 1.5);
  r.excess_kurtosis = m4 / (m2 * m2) - 3.0;
  const double sd = std::sqrt(m2 * m / (m - 1));
  std::vector<double> z(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) z[i] = (x[i] - mean) / sd;
  auto [d, p] = ks_test(std::move(z), std_normal_cdf);
  r.ks_statistic = d;
  r.ks_pvalue = p;
  return r;
}

namespace {

double sample_variance(const double* x, std::size_t m) {
  double mean = 0.0;
  for (std::size_t i = 0; i < m; ++i) mean += x[i];
  mean /= m;
  double s = 0.0;
  for (std::size_t i = 0; i < m; ++i) s += (x[i] - mean) * (x[i] - mean);
  return s / (m - 1);
}

}  // namespace

BlockJackknife jackknife_variance(const std::vector<double>& x, int blocks) {
  if (x.size() < 2) throw Error(Errc::invalid_argument, "need at least 2 samples");
  const double full = sample_variance(x.data(), x.size());
  blocks = std::min<int>(blocks, static_cast<int>(x.size()));
  if (blocks < 2) return {full, 0.0};
  std::vector<double> est(blocks), rest;
  rest.reserve(x.size());
  for (int b = 0; b < blocks; ++b) {
    const std::size_t lo = x.size() * b / blocks, hi = x.size() * (b + 1) / blocks;
    rest.clear();
    rest.insert(rest.end(), x.begin(), x.begin() + lo);
    rest.insert(rest.end(), x.begin() + hi, x.end());
    est[b] = sample_variance(rest.data(), rest.size());
  }
  const double mean = std::accumulate(est.begin(), est.end(), 0.0) / blocks;
  double s = 0.0;
  for (double e : est) s += (e - mean) * (e - mean);
  return {full, std::sqrt((blocks - 1.0) / blocks * s)};
}

McSummary summarize(std::vector<double> samples, std::uint64_t seed, int blocks) {
  if (samples.size() < 2) throw Error(Errc::invalid_argument, "need at least 2 samples");
  McSummary s;
  s.n_trials = static_cast<int>(samples.size());
  s.seed = seed;
  s.mean = std::accumulate(samples.begin(), samples.end(), 0.0) / samples.size();
  BlockJackknife jk = jackknife_variance(samples, blocks);
  s.variance = jk.estimate;
  s.variance_stderr = jk.stderr_;
  s.variance_ci_lo = std::max(0.0, jk.estimate - 1.96 * jk.stderr_);
  s.variance_ci_hi = jk.estimate + 1.96 * jk.stderr_;
  if (s.variance > 0.0 && samples.size() >= 3) {
    GaussianityReport g = gaussianity_report(samples);
    s.skewness = g.skewness;
    s.excess_kurtosis = g.excess_kurtosis;
    s.ks_statistic = g.ks_statistic;
    s.ks_pvalue = g.ks_pvalue;
  }
  s.samples = std::move(samples);
  return s;
}

int resolve_jobs(int jobs) {
  if (jobs > 0) return jobs;
  return static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
}

void parallel_for(int count, int jobs, const std::function<void(int)>& body) {
  jobs = std::min(resolve_jobs(jobs), std::max(count, 1));
  std::atomic<int> next{0};
  std::exception_ptr err;
  std::mutex mu;
  auto work = [&] {
    for (int i; (i = next++) < count;) {
      try {
        body(i);
      } catch (...) {
        std::lock_guard<std::mutex> lk(mu);
        if (!err) err = std::current_exception();
        next = count;
      }
    }
  };
  if (jobs <= 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (int j = 0; j < jobs; ++j) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  }
  if (err) std::rethrow_exception(err);
}

McSummary run_mc(const SimParams& params, const TestFunction& f, const McInit& init, int trials,
                 std::uint64_t seed, const McOptions& opts) {
  if (trials < 2) throw Error(Errc::invalid_argument, "need at least 2 trials");
  Configuration fixed;
  if (init.kind == InitKind::deterministic) {
    fixed = init.xi.n() ? init.xi : quantile_configuration(params.n);
    if (static_cast<int>(fixed.n()) != params.n)
      throw Error(Errc::dimension_mismatch, "initial configuration size differs from n");
  }
  std::vector<double> y(trials, 0.0);
  std::vector<char> ok(trials, 0);
  std::atomic<int> failures{0};
  const int max_failures = trials / 100;
  parallel_for(trials, opts.jobs, [&](int k) {
    try {
      Configuration xi = init.kind == InitKind::random_iid ? sample_iid(params.n, seed, k) : fixed;
      Configuration ev = deformed_gue_eigenvalues(xi, params, seed, k, opts.backend);
      y[k] = linear_statistic(ev, f, params.alpha, params.x_star);
      ok[k] = 1;
    } catch (const Error& e) {
      if (e.code() != Errc::ordering_violation && e.code() != Errc::non_convergence) throw;
      if (++failures > max_failures)
        throw Error(Errc::too_many_failures, "more than 1% of trials failed");
    }
  });
  std::vector<double> good;
  good.reserve(trials);
  for (int k = 0; k < trials; ++k)
    if (ok[k]) good.push_back(y[k]);
  McSummary s = summarize(std::move(good), seed);
  s.failures = failures;
  if (!opts.keep_samples) s.samples.clear();
  return s;
}

ScalingFit scaling_regression(const std::vector<std::pair<double, double>>& points) {
  std::vector<double> lx, ly;
  for (const auto& [n, v] : points) {
    if (!(v > 0.0)) throw Error(Errc::invalid_argument, "variances must be positive");
    if (!(n > 0.0)) throw Error(Errc::invalid_argument, "n must be positive");
    lx.push_back(std::log(n));
    ly.push_back(std::log(v));
  }
  std::vector<double> distinct = lx;
  std::sort(distinct.begin(), distinct.end());
  if (std::unique(distinct.begin(), distinct.end()) - distinct.begin() < 3)
    throw Error(Errc::invalid_argument, "need at least 3 distinct n");
  const double m = static_cast<double>(lx.size());
  const double mx = std::accumulate(lx.begin(), lx.end(), 0.0) / m;
  const double my = std::accumulate(ly.begin(), ly.end(), 0.0) / m;
  double sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    sxx += (lx[i] - mx) * (lx[i] - mx);
    sxy += (lx[i] - mx) * (ly[i] - my);
  }
  const double slope = sxy / sxx, icpt = my - slope * mx;
  double rss = 0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    double r = ly[i] - icpt - slope * lx[i];
    rss += r * r;
  }
  return {slope, std::sqrt(rss / (m - 2) / sxx), icpt};
}

double fixed_exponent_prefactor(const std::vector<std::pair<double, double>>& points,
                                double exponent) {
  if (points.empty()) throw Error(Errc::invalid_argument, "no points");
  double s = 0.0;
  for (const auto& [n, v] : points) {
    if (!(v > 0.0)) throw Error(Errc::invalid_argument, "variances must be positive");
    s += std::log(v) - exponent * std::log(n);
  }
  return std::exp(s / points.size());
}

}  // namespace meso
