#pragma once

#include <complex>
#include <optional>

#include "meso/semicircle.hpp"
#include "meso/testfn.hpp"

namespace meso {

struct RegularityReport {
  double sup_value = 0.0;  // grid sup of sqrt(Im w / n) |sum 1/(w - xi_j) - n U(w)|
  double threshold = 0.0;  // A n^delta
  bool passed = false;
  std::complex<double> argmax_w;
  long grid_size = 0;
};

struct NetSpec {
  int levels = 12;             // geometric ladder in Im w from 1/n to 1
  double max_spacing = 0.02;   // Re w spacing is min(max_spacing, Im w / 4)
  double re_margin = 2.0;      // Re w covers U intersected with [-re_margin, re_margin] ...
  int refine_factor = 4;       // ... and is refined this much around the running argmax
  int jobs = 0;                // 0: hardware concurrency
};

// `U` empty means the whole real line. Points with Im w or |Re w| large enough
// that the bound holds automatically are skipped.
RegularityReport check_regularity(const Configuration& xi, std::optional<Interval> U, double A,
                                  double delta, const NetSpec& grid = {});

// Deviation field at one point.
double regularity_deviation(const Configuration& xi, std::complex<double> w);

// X_p = (1/n) sum (i c2 sqrt2 - xi_j)^{-(p+1)} - (1/pi) int sqrt(2-x^2) (i c2 sqrt2 - x)^{-(p+1)} dx,
// c2 = sinh t.
std::complex<double> xp_statistic(const Configuration& xi, int p, double t);
// The semicircle integral alone.
std::complex<double> xp_semicircle_term(int p, double t);

}  // namespace meso
