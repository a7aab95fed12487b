#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "meso/ensemble.hpp"
#include "meso/testfn.hpp"

namespace meso {

// sum_j f(n^alpha (x_j - x_star))
double linear_statistic(const Configuration& x, const TestFunction& f, double alpha, double x_star);

struct GaussianityReport {
  double skewness = 0.0;
  double excess_kurtosis = 0.0;
  double ks_statistic = 0.0;
  double ks_pvalue = 1.0;
};

// Standardises by the sample mean and deviation and compares with N(0,1).
GaussianityReport gaussianity_report(const std::vector<double>& samples);

// P(sup |B| > x) for the Brownian bridge.
double kolmogorov_q(double x);
// One-sample KS statistic against a continuous CDF; pvalue from the asymptotic law.
std::pair<double, double> ks_test(std::vector<double> samples, double (*cdf)(double));

struct TwoSampleKs {
  double statistic;
  double pvalue;
};
TwoSampleKs ks_two_sample(std::vector<double> a, std::vector<double> b);

struct BlockJackknife {
  double estimate;
  double stderr_;
};
// Variance estimate with its block-jackknife standard error.
BlockJackknife jackknife_variance(const std::vector<double>& samples, int blocks = 20);

struct McSummary {
  int n_trials = 0;
  double mean = 0.0;
  double variance = 0.0;
  double variance_ci_lo = 0.0;
  double variance_ci_hi = 0.0;
  double variance_stderr = 0.0;
  double skewness = 0.0;
  double excess_kurtosis = 0.0;
  double ks_statistic = 0.0;
  double ks_pvalue = 1.0;
  std::uint64_t seed = 0;
  int failures = 0;
  std::vector<double> samples;  // Y_n(f) per trial, in trial order
};

// Summary of given samples (trial order matters for the jackknife blocks).
McSummary summarize(std::vector<double> samples, std::uint64_t seed, int blocks = 20);

enum class InitKind { deterministic, random_iid };

struct McInit {
  InitKind kind = InitKind::deterministic;
  Configuration xi;  // used when deterministic; quantiles of size n when empty
};

struct McOptions {
  int jobs = 0;  // 0: hardware concurrency
  EigenBackend backend = EigenBackend::automatic;
  bool keep_samples = true;
};

McSummary run_mc(const SimParams& params, const TestFunction& f, const McInit& init, int trials,
                 std::uint64_t seed, const McOptions& opts = {});

// Runs body(i) for i in [0, count) on `jobs` threads. Exceptions are rethrown after joining.
void parallel_for(int count, int jobs, const std::function<void(int)>& body);
int resolve_jobs(int jobs);

struct ScalingFit {
  double exponent;
  double stderr_;
  double log_prefactor;  // intercept of log variance vs log n
};
ScalingFit scaling_regression(const std::vector<std::pair<double, double>>& points);

// Best multiplicative constant C in variance ~ C n^exponent (least squares in log space).
double fixed_exponent_prefactor(const std::vector<std::pair<double, double>>& points, double exponent);

}  // namespace meso
