#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace meso::acceptance {

struct CriterionResult {
  int id = 0;
  char section = 'A';
  std::string title;
  bool passed = false;
  std::string detail;
  std::uint64_t seed = 0;
  double seconds = 0.0;
};

struct Options {
  std::uint64_t seed = 20240611;
  std::string sections = "ABCDEF";
  int jobs = 0;
  std::ostream* progress = nullptr;  // one line per criterion as it finishes
};

inline constexpr int kCriteria = 18;

char criterion_section(int id);
std::uint64_t criterion_seed(std::uint64_t master, int id);

std::vector<CriterionResult> run_acceptance(const Options& opts);
void print_line(const CriterionResult& r, std::ostream& out);
void write_csv(const std::vector<CriterionResult>& rs, std::ostream& out);

}  // namespace meso::acceptance
