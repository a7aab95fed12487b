#include "meso/error.hpp"
#include "meso/rng.hpp"

namespace meso {

const char* errc_name(Errc c) {
  switch (c) {
    case Errc::invalid_argument: return "invalid argument";
    case Errc::divergent_integral: return "divergent integral";
    case Errc::quadrature_failure: return "quadrature failure";
    case Errc::nonpositive_tau: return "nonpositive tau";
    case Errc::domain: return "domain error";
    case Errc::dimension_mismatch: return "dimension mismatch";
    case Errc::not_hermitian: return "matrix not hermitian";
    case Errc::ordering_violation: return "ordering violation";
    case Errc::vanishing_moment: return "vanishing moment";
    case Errc::nonzero_lower_moment: return "nonzero lower moment";
    case Errc::branch_cut: return "branch cut violation";
    case Errc::non_convergence: return "no convergence";
    case Errc::half_plane_exit: return "left the upper half plane";
    case Errc::pole_on_contour: return "pole on contour";
    case Errc::too_many_failures: return "too many failed trials";
    case Errc::degenerate_sample: return "degenerate sample";
    case Errc::io: return "i/o error";
    case Errc::config: return "config error";
  }
  return "error";
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t stream_key(std::uint64_t seed, std::uint64_t trial, Stream purpose) {
  std::uint64_t k = splitmix64(seed);
  k = splitmix64(k ^ (trial * 0xd1b54a32d192ed03ULL));
  return splitmix64(k ^ static_cast<std::uint64_t>(purpose));
}

Rng make_rng(std::uint64_t seed, std::uint64_t trial, Stream purpose) {
  std::uint64_t k = stream_key(seed, trial, purpose);
  std::seed_seq seq{static_cast<std::uint32_t>(k), static_cast<std::uint32_t>(k >> 32),
                    static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(trial)};
  return Rng(seq);
}

}  // namespace meso
