#pragma once

#include <stdexcept>
#include <string>

namespace meso {

enum class Errc {
  invalid_argument,
  divergent_integral,
  quadrature_failure,
  nonpositive_tau,
  domain,
  dimension_mismatch,
  not_hermitian,
  ordering_violation,
  vanishing_moment,
  nonzero_lower_moment,
  branch_cut,
  non_convergence,
  half_plane_exit,
  pole_on_contour,
  too_many_failures,
  degenerate_sample,
  io,
  config,
};

const char* errc_name(Errc c);

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(std::string(errc_name(code)) + ": " + what), code_(code) {}
  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

}  // namespace meso
