#include "meso/acceptance.hpp"

#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <functional>
#include <map>
#include <ostream>
#include <random>
#include <sstream>

#include "meso/csv.hpp"
#include "meso/ensemble.hpp"
#include "meso/error.hpp"
#include "meso/kernel.hpp"
#include "meso/mcstat.hpp"
#include "meso/regularity.hpp"
#include "meso/theory.hpp"

namespace meso::acceptance {

char criterion_section(int id) {
  if (id <= 4) return 'A';
  if (id <= 7) return 'B';
  if (id <= 11) return 'C';
  if (id <= 16) return 'D';
  if (id == 17) return 'E';
  return 'F';
}

std::uint64_t criterion_seed(std::uint64_t master, int id) {
  return splitmix64(master ^ (0xacce97ull << 8 | static_cast<unsigned>(id)));
}

namespace {

std::string fmt(const char* f, ...) __attribute__((format(printf, 1, 2)));
std::string fmt(const char* f, ...) {
  char buf[1024];
  va_list ap;
  va_start(ap, f);
  std::vsnprintf(buf, sizeof buf, f, ap);
  va_end(ap);
  return buf;
}

double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

struct Outcome {
  bool passed;
  std::string detail;
};

class Suite {
 public:
  explicit Suite(const Options& o) : opts_(o) {}

  CriterionResult run(int id) {
    CriterionResult r;
    r.id = id;
    r.section = criterion_section(id);
    r.title = title(id);
    r.seed = criterion_seed(opts_.seed, id);
    seed_ = r.seed;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      Outcome o = dispatch(id);
      r.passed = o.passed;
      r.detail = o.detail;
    } catch (const std::exception& e) {
      r.passed = false;
      r.detail = std::string("error: ") + e.what();
    }
    r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return r;
  }

  static std::string title(int id) {
    static const char* t[] = {
        "",
        "sigma_inf_sq closed form and dual routes",
        "sigma_tau_sq closed form, large and small tau",
        "S_1(f_h) closed form",
        "kernel weight identity",
        "n=1 kernel, trace, reproducing",
        "determinantal variance vs Monte Carlo at n=4",
        "saddle closed form and F_n'' at n=1024",
        "deterministic alpha>gamma variance and trend",
        "deterministic alpha=gamma variance",
        "deterministic alpha<gamma variance decay",
        "Gaussianity of the deterministic runs",
        "random classical regime",
        "random critical regime",
        "random intermediate scaling p=1",
        "random GUE regime",
        "Var Im X_0 at n=4096",
        "regularity of quantile, iid and degenerate configurations",
        "SDE vs matrix model two-sample KS",
    };
    return t[id];
  }

 private:
  Outcome dispatch(int id) {
    switch (id) {
      case 1: return c1();
      case 2: return c2();
      case 3: return c3();
      case 4: return c4();
      case 5: return c5();
      case 6: return c6();
      case 7: return c7();
      case 8: return c8();
      case 9: return c9();
      case 10: return c10();
      case 11: return c11();
      case 12: return c12();
      case 13: return c13();
      case 14: return c14();
      case 15: return c15();
      case 16: return c16();
      case 17: return c17();
      case 18: return c18();
    }
    throw Error(Errc::invalid_argument, "unknown criterion");
  }

  // Runs are cached by key so criterion 11 reuses the samples of 8 and 9.
  const McSummary& mc(const std::string& key, int n, double alpha, double gamma, double tau,
                      const TestFunction& f, InitKind init, int trials, std::uint64_t seed) {
    auto it = cache_.find(key);
    if (it != cache_.end()) return it->second;
    SimParams P = make_params(n, alpha, gamma, tau, 0.0);
    McOptions o;
    o.jobs = opts_.jobs;
    return cache_.emplace(key, run_mc(P, f, {init, {}}, trials, seed, o)).first->second;
  }

  std::uint64_t sub_seed(int k) const { return splitmix64(seed_ + static_cast<std::uint64_t>(k)); }

  Outcome c1() {
    const double v = sigma_inf_sq(cauchy()), vf = sigma_inf_sq_fourier(cauchy());
    bool ok = std::abs(v - 0.125) <= 1e-8 && std::abs(vf - 0.125) <= 1e-8;
    std::string d = fmt("f_c: %.12g (Fourier %.12g);", v, vf);
    for (auto f : {bump(), odd_bump(), cauchy()}) {
      double a = sigma_inf_sq(f), b = sigma_inf_sq_fourier(f);
      ok = ok && rel(a, b) <= 1e-6;
      d += fmt(" %s rel %.2e;", f.label.c_str(), rel(a, b));
    }
    return {ok, d};
  }

  Outcome c2() {
    bool ok = true;
    std::string d;
    for (double tau : {0.1, 1.0, 10.0}) {
      double v = sigma_tau_sq(cauchy(), tau), ex = tau / (8 * (1 + tau));
      ok = ok && std::abs(v - ex) <= 1e-8;
      d += fmt("tau=%g err %.2e; ", tau, std::abs(v - ex));
    }
    double big = sigma_tau_sq(cauchy(), 100.0) / sigma_inf_sq(cauchy());
    ok = ok && std::abs(big - 1.0) <= 0.01;
    double small = sigma_tau_sq(cauchy(), 1e-3) / (1e-3 / 8);
    ok = ok && std::abs(small - 1.0) <= 0.005;
    d += fmt("ratio at tau=100 %.5f; slope ratio at 1e-3 %.5f", big, small);
    return {ok, d};
  }

  Outcome c3() {
    const double mu1 = 16.0 / 105.0;  // int u^2 (1-u^2)^2 du over [-1,1]
    const double oracle = std::sqrt(2.0) * 2.0 * mu1 * mu1 / (2 * M_PI * M_PI * 16.0);
    const double v = s_p_variance(odd_bump(), 1, 1.0, 0.0);
    bool ok = rel(v, 2.0795e-4) <= 1e-3 && rel(v, oracle) <= 1e-3;
    return {ok, fmt("S_1 = %.8g, oracle %.8g", v, oracle)};
  }

  Outcome c4() {
    std::mt19937_64 rng(seed_);
    std::uniform_real_distribution<double> U(-5, 5), T(0.01, 10);
    double worst = 0.0, worst_unsq = 0.0;
    for (int k = 0; k < 1000; ++k) {
      const double u = U(rng), v = U(rng), tau = T(rng);
      IdentitySides s = kernel_weight_identity(u, v, tau);
      worst = std::max(worst, std::abs(s.lhs - s.rhs));
      IdentitySides s1 = kernel_weight_identity_unsquared(u, v, tau);
      worst_unsq = std::max(worst_unsq, std::abs(s1.lhs - s1.rhs));
    }
    // only the squared form as stated is judged; the first-power form is reported alongside
    return {worst <= 1e-12, fmt("max |lhs-rhs| = %.2e (first-power form %.2e)", worst, worst_unsq)};
  }

  Outcome c5() {
    bool ok = true;
    std::string d;
    {
      const double t = 0.3;
      KernelEvaluator K(make_kernel_context(make_configuration({0.0}), t));
      const double s = -std::expm1(-2 * t);
      double worst = 0.0;
      for (double x : {-1.0, -0.3, 0.0, 0.5, 1.2}) {
        double ex = std::exp(-x * x / s) / std::sqrt(M_PI * s);
        worst = std::max(worst, std::abs(K(x, x) - ex));
      }
      ok = ok && worst <= 1e-8;
      d += fmt("n=1 max err %.2e; ", worst);
    }
    quad::Spec qs;
    qs.epsabs = 1e-12;
    qs.epsrel = 1e-10;
    for (int n : {1, 2, 4, 6}) {
      KernelContext ctx = make_kernel_context(quantile_configuration(n), 0.3);
      KernelEvaluator K(ctx);
      Interval I = kernel_support(ctx);
      std::vector<double> br;
      for (double p : ctx.xi.points) br.push_back(ctx.q * p);
      double tr = quad::integral([&](double x) { return K(x, x); }, I.a, I.b, qs, br);
      ok = ok && std::abs(tr - n) <= 1e-6;
      d += fmt("trace n=%d err %.2e; ", n, std::abs(tr - n));
    }
    KernelEvaluator K4(make_kernel_context(quantile_configuration(4), 0.3));
    double rr = reproducing_residual(K4, 0.0, 0.1);
    ok = ok && rr <= 1e-5;
    d += fmt("reproducing n=4 %.2e", rr);
    return {ok, d};
  }

  Outcome c6() {
    const double t = 0.5;
    const int trials = 200000;
    const Configuration xi = quantile_configuration(4);
    const TestFunction g = rescaled(bump(), 4.0);
    KernelEvaluator K(make_kernel_context(xi, t));
    DeterminantalMoments dm = determinantal_moments(K, g);
    std::vector<double> y(trials);
    parallel_for(trials, opts_.jobs, [&](int k) {
      Configuration ev = deformed_gue_eigenvalues_t(xi, t, seed_, k, EigenBackend::native);
      double s = 0.0;
      for (double x : ev.points) s += g(x);
      y[k] = s;
    });
    BlockJackknife jk = jackknife_variance(y);
    double z = std::abs(dm.variance - jk.estimate) / jk.stderr_;
    return {z <= 3.0, fmt("kernel %.6g (grid %d), MC %.6g +- %.2g, |z| = %.2f", dm.variance, dm.nodes,
                          jk.estimate, jk.stderr_, z)};
  }

  Outcome c7() {
    bool ok = true;
    std::string d;
    const double t = 0.5;
    KernelContext c1 = make_kernel_context(make_configuration({0.0}), t);
    double worst = 0.0;
    for (double x : {0.0, 0.3}) {
      SaddleResult r = saddle_solve(c1, x);
      std::complex<double> ex(x / (2 * c1.q), std::sqrt(2 * c1.s - x * x) / (2 * c1.q));
      worst = std::max(worst, std::abs(r.omega - ex));
    }
    ok = ok && worst <= 1e-12;
    SimParams P = make_params(1024, 0.5, 0.5, 1.0, 0.0);
    KernelContext cn = make_kernel_context(quantile_configuration(1024), P.t);
    SaddleResult r = saddle_solve(cn, 0.0);
    ok = ok && std::abs(r.f_second - 2.0) <= 0.1;
    d = fmt("n=1 err %.2e; F'' at n=1024 = %.5f%+.5fi", worst, r.f_second.real(), r.f_second.imag());
    return {ok, d};
  }

  Outcome c8() {
    const TestFunction f = bump();
    const double target = sigma_inf_sq(f);
    const McSummary& m = mc("c8_512", 512, 0.5, 0.3, 1.0, f, InitKind::deterministic, 2000, sub_seed(0));
    const McSummary& lo = mc("c8_256", 256, 0.5, 0.3, 1.0, f, InitKind::deterministic, 2000, sub_seed(1));
    const McSummary& hi = mc("c8_2048", 2048, 0.5, 0.3, 1.0, f, InitKind::deterministic, 400, sub_seed(2));
    const double r = m.variance / target;
    bool ok = r >= 0.85 && r <= 1.15 && std::abs(hi.variance - target) < std::abs(lo.variance - target);
    return {ok, fmt("Var/sigma_inf^2 at n=512: %.4f; n=256 %.5f, n=2048 %.5f, target %.5f", r,
                    lo.variance, hi.variance, target)};
  }

  Outcome c9() {
    const TestFunction f = bump();
    const double target = sigma_tau_sq(f, 1.0);
    const McSummary& m = mc("c9_512", 512, 0.4, 0.4, 1.0, f, InitKind::deterministic, 2000, sub_seed(0));
    const double r = m.variance / target;
    // reported only: the same limit with the squared weight left unsimplified
    const double sq = sigma_tau_sq_squared_weight(f, 1.0);
    return {r >= 0.8 && r <= 1.2,
            fmt("Var %.5f, sigma_tau^2 %.5f, ratio %.4f; squared-weight form %.5f, ratio %.4f",
                m.variance, target, r, sq, m.variance / sq)};
  }

  Outcome c10() {
    const TestFunction f = bump();
    const double bound = 0.5 * sigma_inf_sq(f);
    const std::pair<int, int> runs[] = {{256, 2000}, {1024, 500}, {4096, 80}};
    std::vector<double> v;
    for (int k = 0; k < 3; ++k)
      v.push_back(mc("c10_" + std::to_string(runs[k].first), runs[k].first, 0.2, 0.6, 1.0, f,
                     InitKind::deterministic, runs[k].second, sub_seed(k))
                      .variance);
    bool ok = v[0] > v[1] && v[1] > v[2];
    for (double x : v) ok = ok && x <= bound;
    return {ok, fmt("Var at n=256,1024,4096: %.5f %.5f %.5f; bound %.5f", v[0], v[1], v[2], bound)};
  }

  Outcome c11() {
    const std::uint64_t s8 = criterion_seed(opts_.seed, 8), s9 = criterion_seed(opts_.seed, 9);
    const TestFunction f = bump();
    const McSummary& a =
        mc("c8_512", 512, 0.5, 0.3, 1.0, f, InitKind::deterministic, 2000, splitmix64(s8));
    const McSummary& b =
        mc("c9_512", 512, 0.4, 0.4, 1.0, f, InitKind::deterministic, 2000, splitmix64(s9));
    bool ok = true;
    std::string d;
    for (const McSummary* m : {&a, &b}) {
      ok = ok && m->ks_pvalue >= 0.01 && std::abs(m->skewness) <= 0.15 &&
           std::abs(m->excess_kurtosis) <= 0.3;
      d += fmt("KS p %.3f skew %.3f exkurt %.3f; ", m->ks_pvalue, m->skewness, m->excess_kurtosis);
    }
    return {ok, d};
  }

  Outcome random_mesoscopic(const std::string& key, double alpha, double gamma, double target) {
    const int n = 1024;
    const McSummary& m = mc(key, n, alpha, gamma, 1.0, bump(), InitKind::random_iid, 2000, sub_seed(0));
    const double v = std::pow(n, alpha - 1.0) * m.variance;
    return {rel(v, target) <= 0.15, fmt("n^(alpha-1) Var = %.5f, predicted %.5f, ratio %.4f", v, target, v / target)};
  }

  Outcome c12() { return random_mesoscopic("c12", 0.2, 0.5, classical_variance(bump(), 0.0)); }
  Outcome c13() { return random_mesoscopic("c13", 0.3, 0.3, critical_random_variance(bump(), 1.0, 0.0)); }

  Outcome c14() {
    const TestFunction f = odd_bump();
    const std::pair<int, int> runs[] = {{256, 2000}, {512, 1000}, {1024, 500}, {2048, 200}, {4096, 60}};
    std::vector<std::pair<double, double>> pts;
    std::string d;
    for (int k = 0; k < 5; ++k) {
      const McSummary& m = mc("c14_" + std::to_string(runs[k].first), runs[k].first, 0.45, 0.3, 1.0, f,
                              InitKind::random_iid, runs[k].second, sub_seed(k));
      pts.push_back({static_cast<double>(runs[k].first), m.variance});
      d += fmt("n=%d Var %.5f; ", runs[k].first, m.variance);
    }
    const double expected = 1.0 - 0.45 + 3.0 * (0.3 - 0.45);
    ScalingFit fit = scaling_regression(pts);
    const double pref = fixed_exponent_prefactor(pts, expected);
    const double sp = s_p_variance(f, 1, 1.0, 0.0);
    bool ok = std::abs(fit.exponent - expected) <= 0.15 && rel(pref, sp) <= 0.25;
    d += fmt("exponent %.4f +- %.4f (expected %.2f); prefactor %.5g vs S_1 %.5g", fit.exponent, fit.stderr_,
             expected, pref, sp);
    return {ok, d};
  }

  Outcome c15() {
    const TestFunction f = bump();
    const double target = sigma_inf_sq(f);
    const McSummary& m = mc("c15", 1024, 0.8, 0.2, 1.0, f, InitKind::random_iid, 2000, sub_seed(0));
    const double r = m.variance / target;
    return {r >= 0.8 && r <= 1.2 && m.ks_pvalue >= 0.01,
            fmt("Var/sigma_inf^2 %.4f, KS p %.3f", r, m.ks_pvalue)};
  }

  Outcome c16() {
    const int n = 4096, seeds = 2000;
    const double t = make_params(n, 0.5, 0.5, 1.0, 0.0).t;
    const std::complex<double> semi = xp_semicircle_term(0, t);
    const std::complex<double> w0(0.0, std::sinh(t) * kEdge);
    std::vector<double> im(seeds);
    parallel_for(seeds, opts_.jobs, [&](int k) {
      Configuration xi = sample_iid(n, seed_, k);
      std::complex<double> s = 0.0;
      for (double x : xi.points) s += 1.0 / (w0 - x);
      im[k] = (s / static_cast<double>(n) - semi).imag();
    });
    const double v = jackknife_variance(im).estimate;
    const double pred = var_im_xp_prediction(0, 0.5, 1.0, n);
    return {rel(v, pred) <= 0.2, fmt("Var Im X_0 %.4e, predicted %.4e, ratio %.4f", v, pred, v / pred)};
  }

  Outcome c17() {
    NetSpec net;
    net.jobs = opts_.jobs;
    bool ok = true;
    std::string d;
    for (int n : {256, 1024, 4096}) {
      RegularityReport r = check_regularity(quantile_configuration(n), std::nullopt, 1.0, 0.2, net);
      ok = ok && r.passed;
      d += fmt("quantile n=%d sup %.3f/%.3f; ", n, r.sup_value, r.threshold);
    }
    int pass = 0;
    double worst = 0.0;
    for (int s = 0; s < 100; ++s) {
      RegularityReport r = check_regularity(sample_iid(1024, seed_, s), std::nullopt, 1.0, 0.2, net);
      pass += r.passed;
      worst = std::max(worst, r.sup_value);
    }
    ok = ok && pass >= 99;
    RegularityReport z = check_regularity(make_configuration(std::vector<double>(1024, 0.0)), std::nullopt, 1.0, 0.2, net);
    ok = ok && !z.passed;
    d += fmt("iid passed %d/100 (max sup %.3f); zeros sup %.1f at %.4g%+.4gi", pass, worst, z.sup_value,
             z.argmax_w.real(), z.argmax_w.imag());
    return {ok, d};
  }

  Outcome c18() {
    const int n = 64, trials = 500;
    const SimParams P = make_params(n, 0.5, 0.3, 1.0, 0.0);
    const Configuration xi = quantile_configuration(n);
    const int steps = default_sde_steps(n, P.t);
    std::vector<double> a(trials), b(trials);
    // the middle eigenvalue of each run, one independent value per trial
    parallel_for(trials, opts_.jobs, [&](int k) {
      a[k] = simulate_dbm_sde(xi, P, steps, sub_seed(0), k).points[n / 2];
      b[k] = deformed_gue_eigenvalues(xi, P, sub_seed(1), k).points[n / 2];
    });
    TwoSampleKs ks = ks_two_sample(a, b);
    return {ks.pvalue >= 0.01, fmt("steps %d, D = %.4f, p = %.4f", steps, ks.statistic, ks.pvalue)};
  }

  Options opts_;
  std::uint64_t seed_ = 0;
  std::map<std::string, McSummary> cache_;
};

}  // namespace

std::vector<CriterionResult> run_acceptance(const Options& opts) {
  Suite s(opts);
  std::vector<CriterionResult> out;
  for (int id = 1; id <= kCriteria; ++id) {
    if (opts.sections.find(criterion_section(id)) == std::string::npos) continue;
    out.push_back(s.run(id));
    if (opts.progress) print_line(out.back(), *opts.progress);
  }
  return out;
}

void print_line(const CriterionResult& r, std::ostream& out) {
  out << (r.passed ? "PASS" : "FAIL") << "  " << r.section << r.id << "  " << r.title << "  [" << r.detail
      << "]  seed=" << r.seed << "  " << fmt("%.1fs", r.seconds) << "\n";
  out.flush();
}

void write_csv(const std::vector<CriterionResult>& rs, std::ostream& out) {
  csv::Writer w(out);
  w.row({"id", "section", "title", "passed", "detail", "seed"});
  for (const auto& r : rs) {
    w.field(r.id).field(std::string(1, r.section)).field(r.title).field(r.passed).field(r.detail);
    w.field(std::to_string(r.seed));
    w.end_row();
  }
}

}  // namespace meso::acceptance
