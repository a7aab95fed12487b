#include "meso/semicircle.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <boost/math/tools/roots.hpp>

#include "meso/error.hpp"

namespace meso {

Configuration make_configuration(std::vector<double> pts, ConfigKind kind, std::uint64_t seed) {
  for (double p : pts)
    if (!std::isfinite(p)) throw Error(Errc::invalid_argument, "configuration point not finite");
  std::sort(pts.begin(), pts.end());
  return Configuration{std::move(pts), kind, seed};
}

double sc_density(double x) {
  double r = 2.0 - x * x;
  return r > 0 ? std::sqrt(r) / M_PI : 0.0;
}

double sc_cdf(double x) {
  if (x <= -kEdge) return 0.0;
  if (x >= kEdge) return 1.0;
  return 0.5 + (x * std::sqrt(2.0 - x * x) + 2.0 * std::asin(x / kEdge)) / (2.0 * M_PI);
}

double sc_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) throw Error(Errc::domain, "quantile needs 0 < p < 1");
  if (p == 0.5) return 0.0;
  std::uintmax_t iters = 200;
  auto g = [p](double x) { return sc_cdf(x) - p; };
  auto tol = [](double a, double b) { return std::abs(b - a) <= 1e-15; };
  auto r = boost::math::tools::toms748_solve(g, -kEdge, kEdge, -p, 1.0 - p, tol, iters);
  return 0.5 * (r.first + r.second);
}

Configuration quantile_configuration(int n) {
  if (n < 1) throw Error(Errc::invalid_argument, "n must be >= 1");
  std::vector<double> x(n);
  for (int j = 0; j < n; ++j) x[j] = sc_quantile((j + 0.5) / n);
  // enforce exact symmetry
  for (int j = 0; j < n / 2; ++j) {
    double m = 0.5 * (x[n - 1 - j] - x[j]);
    x[j] = -m;
    x[n - 1 - j] = m;
  }
  if (n % 2) x[n / 2] = 0.0;
  return make_configuration(std::move(x), ConfigKind::initial);
}

double sample_semicircle(Rng& rng) {
  std::uniform_real_distribution<double> ux(-kEdge, kEdge), uy(0.0, kEdge / M_PI);
  for (;;) {
    double x = ux(rng), y = uy(rng);
    if (y <= sc_density(x)) return x;
  }
}

Configuration sample_iid(int n, std::uint64_t seed, std::uint64_t trial) {
  if (n < 1) throw Error(Errc::invalid_argument, "n must be >= 1");
  Rng rng = make_rng(seed, trial, Stream::initial);
  std::vector<double> x(n);
  for (double& v : x) v = sample_semicircle(rng);
  return make_configuration(std::move(x), ConfigKind::initial, seed);
}

std::complex<double> sc_sqrt(std::complex<double> z) {
  return std::sqrt(z - kEdge) * std::sqrt(z + kEdge);
}

std::complex<double> stieltjes_u(std::complex<double> z) {
  if (z.imag() == 0.0 && std::abs(z.real()) <= kEdge)
    throw Error(Errc::branch_cut, "stieltjes_u evaluated on [-sqrt2, sqrt2]");
  return z - sc_sqrt(z);
}

std::complex<double> stieltjes_u_prime(std::complex<double> z) {
  if (z.imag() == 0.0 && std::abs(z.real()) <= kEdge)
    throw Error(Errc::branch_cut, "stieltjes_u_prime evaluated on [-sqrt2, sqrt2]");
  return 1.0 - z / sc_sqrt(z);
}

double kolmogorov_distance_sc(const Configuration& c) {
  const auto& x = c.points;
  const double n = static_cast<double>(x.size());
  double d = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    double F = sc_cdf(x[i]);
    d = std::max({d, std::abs(F - i / n), std::abs(F - (i + 1) / n)});
  }
  return d;
}

const char* kind_name(ConfigKind k) { return k == ConfigKind::initial ? "initial" : "evolved"; }

void write_configuration_csv(std::ostream& out, const Configuration& c) {
  out << "# n=" << c.n() << " kind=" << kind_name(c.kind) << " seed=" << c.seed << "\n";
  out << "x\n";
  char buf[40];
  for (double v : c.points) {
    std::snprintf(buf, sizeof buf, "%.17g", v);
    out << buf << "\n";
  }
}

void write_configuration_csv(const std::string& path, const Configuration& c) {
  std::ofstream out(path);
  if (!out) throw Error(Errc::io, "cannot write " + path);
  write_configuration_csv(out, c);
}

Configuration read_configuration_csv(std::istream& in) {
  std::string line;
  std::vector<double> x;
  ConfigKind kind = ConfigKind::initial;
  std::uint64_t seed = 0;
  long expected = -1;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (line[0] == '#') {
      std::istringstream ss(line.substr(1));
      std::string tok;
      while (ss >> tok) {
        auto eq = tok.find('=');
        if (eq == std::string::npos) continue;
        std::string k = tok.substr(0, eq), v = tok.substr(eq + 1);
        if (k == "n") expected = std::stol(v);
        if (k == "kind") kind = v == "evolved" ? ConfigKind::evolved : ConfigKind::initial;
        if (k == "seed") seed = std::stoull(v);
      }
      continue;
    }
    if (line == "x") continue;
    x.push_back(std::stod(line));
  }
  if (expected >= 0 && static_cast<std::size_t>(expected) != x.size())
    throw Error(Errc::io, "configuration header n does not match row count");
  return make_configuration(std::move(x), kind, seed);
}

Configuration read_configuration_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::io, "cannot open " + path);
  return read_configuration_csv(in);
}

}  // namespace meso
