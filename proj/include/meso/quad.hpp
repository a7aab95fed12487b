#pragma once

#include <array>
#include <complex>
#include <functional>
#include <vector>

namespace meso::quad {

using Fn = std::function<double(double)>;

struct Spec {
  double epsabs = 1e-10;
  double epsrel = 1e-8;
  std::size_t limit = 4000;
};

struct Result {
  double value = 0.0;
  double abserr = 0.0;
};

// Adaptive Gauss-Kronrod (GSL QAGS/QAGP). Infinite endpoints are mapped with
// u = tan(theta). `breaks` are interior points where the integrand is rough.
Result integrate(const Fn& f, double a, double b, const Spec& spec = {},
                 std::vector<double> breaks = {});
double integral(const Fn& f, double a, double b, const Spec& spec = {},
                std::vector<double> breaks = {});

// int_a^b f(x) cos(omega x) dx, or sin if `sine`; a and b finite.
double oscillatory(const Fn& f, double a, double b, double omega, bool sine, const Spec& spec = {});
// int_a^inf f(x) cos(omega x) dx, or sin if `sine`; omega != 0.
double oscillatory_tail(const Fn& f, double a, double omega, bool sine, const Spec& spec = {});

// 32-point Gauss-Legendre rule on [-1, 1].
const std::array<double, 32>& gl32_nodes();
const std::array<double, 32>& gl32_weights();

template <class F>
auto gl32(F&& f, double a, double b) {
  const auto& x = gl32_nodes();
  const auto& w = gl32_weights();
  double h = 0.5 * (b - a), m = 0.5 * (a + b);
  decltype(f(m)) s{};
  for (int i = 0; i < 32; ++i) s += w[i] * f(m + h * x[i]);
  return s * h;
}

}  // namespace meso::quad
