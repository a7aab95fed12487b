#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "meso/mcstat.hpp"
#include "meso/theory.hpp"

namespace meso::cli {

inline constexpr const char* kVersion = "0.1.0";
inline constexpr std::uint64_t kDefaultSeed = 20240611;

enum class Mode { simulate, sweep, theory, kernel_check, regularity, acceptance };

const char* mode_name(Mode m);
Mode parse_mode(const std::string& s);

struct ExperimentConfig {
  Mode mode = Mode::simulate;
  int n = 512;
  double alpha = 0.5;
  double gamma = 0.3;
  double tau = 1.0;
  double x_star = 0.0;
  std::vector<int> n_grid;  // sweep grids; empty means {n}, {alpha}, ...
  std::vector<double> alpha_grid;
  std::vector<double> gamma_grid;
  std::vector<double> tau_grid;
  bool include_boundaries = false;  // sweep: add the alpha=boundary cell for each gamma
  std::string function = "bump";
  InitKind init = InitKind::deterministic;
  int trials = 2000;
  std::optional<std::uint64_t> seed;
  int jobs = 0;
  std::string output_path = "meso_out";
  // kernel-check and regularity
  double t = 0.3;  // kernel-check only; <= 0 means the t of (n, gamma, tau, x_star)
  std::string xi_source = "quantile";  // quantile | iid | zeros | CSV path
  double A = 1.0;
  double delta = 0.2;
  // acceptance
  std::string sections = "ABCDEF";
};

nlohmann::json to_json(const ExperimentConfig& c);
// Applies the keys of `j` on top of `base`; unknown keys and bad types are config errors naming the key.
ExperimentConfig apply_json(const nlohmann::json& j, ExperimentConfig base = {});
// Reads a config or a run manifest (its "config" object). Parse errors carry the line number.
ExperimentConfig load_config(const std::string& path, ExperimentConfig base = {});
// "key=value" overrides; the value is read as JSON when it parses, else as a string.
ExperimentConfig apply_assignment(const std::string& kv, ExperimentConfig base);

// Throws Errc::config when an invariant fails.
void validate(const ExperimentConfig& c);
std::uint64_t master_seed(const ExperimentConfig& c);

struct SweepRow {
  double alpha, gamma, tau;
  int n;
  InitKind init;
  double measured_var;
  Regime regime;
  double predicted_var;       // C n^e, NaN when no constant is predicted
  double predicted_exponent;  // e
  double ks_pvalue;
};

std::vector<SweepRow> run_sweep(const ExperimentConfig& c, std::ostream* progress = nullptr);
double row_ratio(const SweepRow& r);
void emit_phase_diagram_data(const std::vector<SweepRow>& rows, std::ostream& out);

nlohmann::json theory_report(const ExperimentConfig& c);
nlohmann::json kernel_check_report(const ExperimentConfig& c);
nlohmann::json regularity_report(const ExperimentConfig& c);

// Writes the data file and `<output_path>.manifest.json`. Exit codes: 0 ok, 2 acceptance failure, 1 error.
int run(const ExperimentConfig& c, std::ostream& log);

int main_entry(int argc, char** argv);

}  // namespace meso::cli
