// Acceptance gate: one PASS/FAIL line per criterion, exit status 1 if any fails.
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "meso/acceptance.hpp"

int main(int argc, char** argv) {
  CLI::App app{"acceptance criteria"};
  meso::acceptance::Options opts;
  app.add_option("--section", opts.sections, "sections to run, e.g. AB");
  app.add_option("--seed", opts.seed, "master seed");
  app.add_option("--jobs", opts.jobs, "worker threads");
  CLI11_PARSE(app, argc, argv);
  opts.progress = &std::cout;
  std::cout << "acceptance sections " << opts.sections << ", master seed " << opts.seed << "\n";
  auto rs = meso::acceptance::run_acceptance(opts);
  int failed = 0;
  for (const auto& r : rs) failed += !r.passed;
  std::cout << rs.size() - failed << "/" << rs.size() << " criteria passed\n";
  return failed ? 1 : 0;
}
