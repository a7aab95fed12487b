#pragma once

#include <complex>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "meso/rng.hpp"

namespace meso {

enum class ConfigKind { initial, evolved };

struct Configuration {
  std::vector<double> points;  // sorted, finite
  ConfigKind kind = ConfigKind::initial;
  std::uint64_t seed = 0;  // provenance only

  std::size_t n() const { return points.size(); }
};

// Sorts and validates.
Configuration make_configuration(std::vector<double> pts, ConfigKind kind = ConfigKind::initial,
                                 std::uint64_t seed = 0);

inline constexpr double kEdge = 1.4142135623730950488;  // sqrt(2)

double sc_density(double x);
double sc_cdf(double x);
double sc_quantile(double p);
Configuration quantile_configuration(int n);
double sample_semicircle(Rng& rng);
Configuration sample_iid(int n, std::uint64_t seed, std::uint64_t trial = 0);

// U(z) = z - sqrt(z^2 - 2), the Stieltjes transform of the semicircle law.
std::complex<double> stieltjes_u(std::complex<double> z);
// U'(z) = 1 - z / sqrt(z^2 - 2)
std::complex<double> stieltjes_u_prime(std::complex<double> z);
// sqrt(z^2 - 2) with the z + O(1/z) branch
std::complex<double> sc_sqrt(std::complex<double> z);

// Kolmogorov distance between the empirical CDF of `c` and the semicircle CDF.
double kolmogorov_distance_sc(const Configuration& c);

void write_configuration_csv(std::ostream& out, const Configuration& c);
void write_configuration_csv(const std::string& path, const Configuration& c);
Configuration read_configuration_csv(std::istream& in);
Configuration read_configuration_csv(const std::string& path);

const char* kind_name(ConfigKind k);

}  // namespace meso
