#pragma once

#include <complex>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "meso/quad.hpp"

namespace meso {

struct Interval {
  double a = 0.0;
  double b = 0.0;
  bool contains(double u) const { return u >= a && u <= b; }
  double length() const { return b - a; }
};

// Immutable after construction; safe to share across threads.
struct TestFunction {
  std::function<double(double)> evaluator;
  std::function<double(double)> derivative_evaluator;
  std::optional<Interval> support_hint;
  std::string label;

  double operator()(double u) const { return evaluator(u); }
  double derivative(double u) const { return derivative_evaluator(u); }
};

// Derivative defaults to a central difference when `df` is empty.
TestFunction make_test_function(std::string label, std::function<double(double)> f,
                                std::function<double(double)> df = {},
                                std::optional<Interval> support = std::nullopt);

// f_b(u) = (1-u^2)^2 on [-1,1]
TestFunction bump();
// f_h(u) = u (1-u^2)^2 on [-1,1]
TestFunction odd_bump();
// f_c(u) = 1/(1+u^2)
TestFunction cauchy();
TestFunction constant_function(double c);
// u -> f(scale * u)
TestFunction rescaled(const TestFunction& f, double scale);

// "bump", "odd-bump", "cauchy", or a path to a (u, f) CSV table.
TestFunction function_by_name(const std::string& name);
TestFunction tabulated(std::vector<double> u, std::vector<double> f, std::string label = "table");
TestFunction load_function_csv(const std::string& path);

struct GridFunction {
  double lo = 0.0;
  double hi = 0.0;
  double step = 1.0;
  std::vector<std::complex<double>> values;

  std::size_t size() const { return values.size(); }
  double point(std::size_t i) const { return lo + step * static_cast<double>(i); }
};

struct FrequencyGrid {
  double lo = -10.0;
  double hi = 10.0;
  double step = 0.1;
};

double moment(const TestFunction& f, int k, const quad::Spec& spec = {});

// fhat(w) = (2 pi)^{-1/2} int f(x) e^{-i x w} dx
std::complex<double> fourier_at(const TestFunction& f, double omega, const quad::Spec& spec = {});
GridFunction fourier_transform(const TestFunction& f, const FrequencyGrid& grid,
                               const quad::Spec& spec = {});

// int |fhat(w)|^2 weight(|w|) dw over the real line
double spectral_integral(const TestFunction& f, const std::function<double(double)>& weight,
                         const quad::Spec& spec = {});

TestFunction poisson_smooth(const TestFunction& f, double tau);

double l2_norm_sq(const TestFunction& f, const quad::Spec& spec = {});

// int int ((f(u)-f(v))/(u-v))^2 du dv times an optional weight of |u-v|
double sobolev_half_seminorm_sq(const TestFunction& f, const quad::Spec& spec = {});
double weighted_difference_integral(const TestFunction& f,
                                    const std::function<double(double)>& weight,
                                    const std::function<double(double, double)>& outside_tail,
                                    const quad::Spec& spec = {}, double weight_scale = 0.0);

struct PairGridSpec {
  double lo = -20.0;
  double hi = 20.0;
  int points = 801;
  int refine_points = 41;
};

// Grid sup of sqrt(1+x^2) sqrt(1+y^2) |f(x)-f(y)|/|x-y|: a lower bound of the true norm.
double weighted_lipschitz_norm(const TestFunction& f, const PairGridSpec& grid = {});

}  // namespace meso
