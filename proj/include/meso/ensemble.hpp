#pragma once

#include <complex>
#include <cstdint>
#include <vector>

#include "meso/semicircle.hpp"

namespace meso {

struct SimParams {
  int n = 1;
  double alpha = 0.5;
  double gamma = 0.5;
  double tau = 1.0;
  double x_star = 0.0;
  double t = 0.0;  // tau / (n^gamma sqrt(2 - x_star^2))
  double q = 1.0;  // e^{-t}
};

SimParams make_params(int n, double alpha, double gamma, double tau, double x_star = 0.0);

struct HermitianMatrix {
  int n = 0;
  std::vector<std::complex<double>> entries;  // column-major

  HermitianMatrix() = default;
  explicit HermitianMatrix(int dim) : n(dim), entries(static_cast<std::size_t>(dim) * dim) {}
  std::complex<double>& operator()(int i, int j) { return entries[i + static_cast<std::size_t>(j) * n]; }
  const std::complex<double>& operator()(int i, int j) const {
    return entries[i + static_cast<std::size_t>(j) * n];
  }
};

enum class EigenBackend {
  automatic,  // native below 128, LAPACK above
  native,     // Householder tridiagonalisation + implicit QL
  lapack,     // zheevd_2stage, eigenvalues only
};

// E|X_ij|^2 = 1/(2n); variates come from the (seed, trial, gue) stream.
HermitianMatrix sample_gue(int n, std::uint64_t seed, std::uint64_t trial = 0);
void fill_gue(HermitianMatrix& X, Rng& rng);

Configuration hermitian_eigenvalues(const HermitianMatrix& M,
                                    EigenBackend backend = EigenBackend::automatic);
// No hermiticity check; `M` is consumed as scratch space.
std::vector<double> eigenvalues_inplace(HermitianMatrix& M, EigenBackend backend);

// Eigenvalues of a real symmetric tridiagonal matrix (diagonal d, off-diagonal e of size n-1).
std::vector<double> tridiagonal_eigenvalues(std::vector<double> d, std::vector<double> e);

Configuration deformed_gue_eigenvalues(const Configuration& xi, const SimParams& params,
                                       std::uint64_t seed, std::uint64_t trial = 0,
                                       EigenBackend backend = EigenBackend::automatic);
// Same model with an explicit time t >= 0 (t = inf gives the pure GUE).
Configuration deformed_gue_eigenvalues_t(const Configuration& xi, double t, std::uint64_t seed,
                                         std::uint64_t trial = 0,
                                         EigenBackend backend = EigenBackend::automatic);

struct SdeOptions {
  bool noise = true;
  bool interaction = true;
  int max_halvings = 20;
};

int default_sde_steps(int n, double t);

// Euler-Maruyama for dx_i = sqrt(1/n) dB_i - x_i dt + (1/n) sum_{j!=i} dt/(x_i - x_j).
Configuration simulate_dbm_sde(const Configuration& xi, const SimParams& params, int steps,
                               std::uint64_t seed, std::uint64_t trial = 0,
                               const SdeOptions& opts = {});
Configuration simulate_dbm_sde_t(const Configuration& xi, double t, int steps, std::uint64_t seed,
                                 std::uint64_t trial = 0, const SdeOptions& opts = {});

}  // namespace meso
