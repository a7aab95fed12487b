#include <chrono>
#include <cmath>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <mutex>
#include <sstream>

#include <CLI11.hpp>

#include "meso/acceptance.hpp"
#include "meso/cli.hpp"
#include "meso/csv.hpp"
#include "meso/error.hpp"
#include "meso/kernel.hpp"
#include "meso/regularity.hpp"

namespace meso::cli {

using nlohmann::json;

const char* mode_name(Mode m) {
  switch (m) {
    case Mode::simulate: return "simulate";
    case Mode::sweep: return "sweep";
    case Mode::theory: return "theory";
    case Mode::kernel_check: return "kernel-check";
    case Mode::regularity: return "regularity";
    case Mode::acceptance: return "acceptance";
  }
  return "unknown";
}

Mode parse_mode(const std::string& s) {
  for (Mode m : {Mode::simulate, Mode::sweep, Mode::theory, Mode::kernel_check, Mode::regularity,
                 Mode::acceptance})
    if (s == mode_name(m)) return m;
  throw Error(Errc::config, "key 'mode': unknown mode '" + s + "'");
}

namespace {

const char* init_name(InitKind k) { return k == InitKind::random_iid ? "random" : "deterministic"; }

InitKind parse_init(const std::string& s) {
  if (s == "deterministic" || s == "det") return InitKind::deterministic;
  if (s == "random" || s == "random_iid" || s == "iid") return InitKind::random_iid;
  throw Error(Errc::config, "key 'init': expected deterministic or random, got '" + s + "'");
}

template <class T>
T get_as(const json& v, const std::string& key) {
  try {
    return v.get<T>();
  } catch (const json::exception& e) {
    throw Error(Errc::config, "key '" + key + "': " + e.what());
  }
}

// accepts a scalar or an array
template <class T>
std::vector<T> get_list(const json& v, const std::string& key) {
  if (v.is_array()) return get_as<std::vector<T>>(v, key);
  return {get_as<T>(v, key)};
}

}  // namespace

json to_json(const ExperimentConfig& c) {
  json j;
  j["mode"] = mode_name(c.mode);
  j["n"] = c.n;
  j["alpha"] = c.alpha;
  j["gamma"] = c.gamma;
  j["tau"] = c.tau;
  j["x_star"] = c.x_star;
  j["n_grid"] = c.n_grid;
  j["alpha_grid"] = c.alpha_grid;
  j["gamma_grid"] = c.gamma_grid;
  j["tau_grid"] = c.tau_grid;
  j["include_boundaries"] = c.include_boundaries;
  j["function"] = c.function;
  j["init"] = init_name(c.init);
  j["trials"] = c.trials;
  j["seed"] = master_seed(c);
  j["jobs"] = c.jobs;
  j["output_path"] = c.output_path;
  j["t"] = c.t;
  j["xi_source"] = c.xi_source;
  j["A"] = c.A;
  j["delta"] = c.delta;
  j["sections"] = c.sections;
  return j;
}

ExperimentConfig apply_json(const json& j, ExperimentConfig c) {
  if (!j.is_object()) throw Error(Errc::config, "config must be a JSON object");
  for (const auto& [key, v] : j.items()) {
    if (key == "mode") c.mode = parse_mode(get_as<std::string>(v, key));
    else if (key == "n") c.n = get_as<int>(v, key);
    else if (key == "alpha") c.alpha = get_as<double>(v, key);
    else if (key == "gamma") c.gamma = get_as<double>(v, key);
    else if (key == "tau") c.tau = get_as<double>(v, key);
    else if (key == "x_star" || key == "xstar") c.x_star = get_as<double>(v, key);
    else if (key == "n_grid") c.n_grid = get_list<int>(v, key);
    else if (key == "alpha_grid") c.alpha_grid = get_list<double>(v, key);
    else if (key == "gamma_grid") c.gamma_grid = get_list<double>(v, key);
    else if (key == "tau_grid") c.tau_grid = get_list<double>(v, key);
    else if (key == "include_boundaries") c.include_boundaries = get_as<bool>(v, key);
    else if (key == "function") c.function = get_as<std::string>(v, key);
    else if (key == "init") c.init = parse_init(get_as<std::string>(v, key));
    else if (key == "trials") c.trials = get_as<int>(v, key);
    else if (key == "seed") c.seed = get_as<std::uint64_t>(v, key);
    else if (key == "jobs") c.jobs = get_as<int>(v, key);
    else if (key == "output_path" || key == "out") c.output_path = get_as<std::string>(v, key);
    else if (key == "t") c.t = get_as<double>(v, key);
    else if (key == "xi_source") c.xi_source = get_as<std::string>(v, key);
    else if (key == "A") c.A = get_as<double>(v, key);
    else if (key == "delta") c.delta = get_as<double>(v, key);
    else if (key == "sections") c.sections = get_as<std::string>(v, key);
    else throw Error(Errc::config, "unknown key '" + key + "'");
  }
  return c;
}

ExperimentConfig load_config(const std::string& path, ExperimentConfig base) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::io, "cannot open config " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  const std::string text = ss.str();
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    std::size_t line = 1 + std::count(text.begin(), text.begin() + std::min(e.byte, text.size()), '\n');
    throw Error(Errc::config, path + ":" + std::to_string(line) + ": " + e.what());
  }
  if (j.is_object() && j.contains("config") && j.contains("version")) j = j["config"];
  try {
    return apply_json(j, base);
  } catch (const Error& e) {
    throw Error(Errc::config, path + ": " + e.what());
  }
}

ExperimentConfig apply_assignment(const std::string& kv, ExperimentConfig base) {
  auto eq = kv.find('=');
  if (eq == std::string::npos || eq == 0) throw Error(Errc::config, "expected key=value, got '" + kv + "'");
  const std::string key = kv.substr(0, eq), val = kv.substr(eq + 1);
  json v = json::parse(val, nullptr, false);
  if (v.is_discarded()) v = val;
  json j;
  j[key] = v;
  return apply_json(j, base);
}

void validate(const ExperimentConfig& c) {
  auto unit = [](double v) { return v > 0.0 && v < 1.0; };
  if (c.n < 1) throw Error(Errc::config, "key 'n': must be >= 1");
  if (c.trials < 2) throw Error(Errc::config, "key 'trials': must be >= 2");
  if (c.mode == Mode::sweep) {
    for (double a : c.alpha_grid)
      if (!unit(a)) throw Error(Errc::config, "key 'alpha_grid': values must lie in (0,1)");
    for (double g : c.gamma_grid)
      if (!unit(g)) throw Error(Errc::config, "key 'gamma_grid': values must lie in (0,1)");
    for (int n : c.n_grid)
      if (n < 1) throw Error(Errc::config, "key 'n_grid': values must be >= 1");
  }
  if (c.mode == Mode::simulate || c.mode == Mode::sweep || c.mode == Mode::theory) {
    if (!unit(c.alpha)) throw Error(Errc::config, "key 'alpha': must lie in (0,1)");
    if (!unit(c.gamma)) throw Error(Errc::config, "key 'gamma': must lie in (0,1)");
  }
  if (!(c.tau > 0.0)) throw Error(Errc::config, "key 'tau': must be positive");
  if (!(std::abs(c.x_star) < kEdge)) throw Error(Errc::config, "key 'x_star': must lie in the bulk");
  if (c.output_path.empty()) throw Error(Errc::config, "key 'output_path': empty");
}

std::uint64_t master_seed(const ExperimentConfig& c) {
  if (c.seed) return *c.seed;
  if (const char* env = std::getenv("MESO_DBM_SEED")) {
    try {
      return std::stoull(env);
    } catch (const std::exception&) {
      throw Error(Errc::config, "MESO_DBM_SEED is not an unsigned integer");
    }
  }
  return kDefaultSeed;
}

namespace {

template <class T>
std::vector<T> or_single(const std::vector<T>& grid, T v) {
  return grid.empty() ? std::vector<T>{v} : grid;
}

// Master seed mixed with the cell coordinates so that cells are independent but reproducible.
std::uint64_t cell_seed(std::uint64_t master, std::size_t index) { return splitmix64(master + 0x9e37 * (index + 1)); }

Configuration source_configuration(const std::string& src, int n, std::uint64_t seed) {
  if (src == "quantile") return quantile_configuration(n);
  if (src == "iid") return sample_iid(n, seed);
  if (src == "zeros") return make_configuration(std::vector<double>(n, 0.0));
  return read_configuration_csv(src);
}

double predicted_variance(const RegimePrediction& p, int n) {
  return p.limit_variance_constant * std::pow(static_cast<double>(n), p.variance_scale_exponent);
}

}  // namespace

std::vector<SweepRow> run_sweep(const ExperimentConfig& c, std::ostream* progress) {
  const TestFunction f = function_by_name(c.function);
  struct Cell {
    double alpha, gamma, tau;
    int n;
  };
  std::vector<Cell> cells;
  const bool random = c.init == InitKind::random_iid;
  for (int n : or_single(c.n_grid, c.n))
    for (double tau : or_single(c.tau_grid, c.tau))
      for (double g : or_single(c.gamma_grid, c.gamma)) {
        for (double a : or_single(c.alpha_grid, c.alpha)) {
          // snap near-equalities so the classifier sees the exact boundary
          if (std::abs(a - g) <= kEqualityTol) a = g;
          cells.push_back({a, g, tau, n});
        }
        if (c.include_boundaries) {
          int p = random ? lowest_nonvanishing_moment(f) : 0;
          double b = random ? random_boundary_alpha(g, p) : g;
          if (b < 1.0) cells.push_back({b, g, tau, n});
        }
      }
  std::vector<SweepRow> rows(cells.size());
  std::mutex mu;
  std::size_t done = 0;
  const std::uint64_t master = master_seed(c);
  // cells run concurrently; each cell is a single-threaded run_mc
  parallel_for(static_cast<int>(cells.size()), c.jobs, [&](int i) {
    const Cell& k = cells[i];
    SimParams P = make_params(k.n, k.alpha, k.gamma, k.tau, c.x_star);
    McOptions opts;
    opts.jobs = 1;
    opts.keep_samples = false;
    McSummary s = run_mc(P, f, {c.init, {}}, c.trials, cell_seed(master, i), opts);
    RegimePrediction pr = predict(f, k.alpha, k.gamma, k.tau, c.x_star, random);
    rows[i] = {k.alpha, k.gamma, k.tau, k.n, c.init, s.variance, pr.regime,
               predicted_variance(pr, k.n), pr.variance_scale_exponent, s.ks_pvalue};
    std::lock_guard<std::mutex> lk(mu);
    ++done;
    if (progress)
      *progress << "cell " << done << "/" << cells.size() << " alpha=" << k.alpha
                << " gamma=" << k.gamma << " n=" << k.n << " var=" << s.variance << "\n";
  });
  return rows;
}

double row_ratio(const SweepRow& r) { return r.measured_var / r.predicted_var; }

void emit_phase_diagram_data(const std::vector<SweepRow>& rows, std::ostream& out) {
  csv::Writer w(out);
  w.row({"alpha", "gamma", "n", "measured_var", "predicted_regime", "predicted_var_or_exponent",
         "ratio", "ks_pvalue", "tau", "init", "predicted_exponent", "flag"});
  for (const auto& r : rows) {
    const bool has_var = std::isfinite(r.predicted_var);
    const double ratio = has_var ? row_ratio(r) : std::nan("");
    const char* flag = !has_var ? "none" : (ratio >= 0.7 && ratio <= 1.4 ? "green" : "red");
    w.field(r.alpha).field(r.gamma).field(r.n).field(r.measured_var).field(regime_name(r.regime));
    w.field(has_var ? r.predicted_var : r.predicted_exponent).field(ratio).field(r.ks_pvalue);
    w.field(r.tau).field(init_name(r.init)).field(r.predicted_exponent).field(flag);
    w.end_row();
  }
}

namespace {

json prediction_json(const RegimePrediction& p, int n) {
  json j;
  j["regime"] = regime_name(p.regime);
  j["variance_scale_exponent"] = p.variance_scale_exponent;
  j["limit_variance_constant"] = std::isfinite(p.limit_variance_constant) ? json(p.limit_variance_constant) : json();
  j["predicted_variance_at_n"] = std::isfinite(p.limit_variance_constant) ? json(predicted_variance(p, n)) : json();
  j["notes"] = p.notes;
  return j;
}

json complex_json(std::complex<double> z) { return json::array({z.real(), z.imag()}); }

}  // namespace

json theory_report(const ExperimentConfig& c) {
  const TestFunction f = function_by_name(c.function);
  json j;
  j["function"] = c.function;
  j["alpha"] = c.alpha;
  j["gamma"] = c.gamma;
  j["tau"] = c.tau;
  j["x_star"] = c.x_star;
  j["n"] = c.n;
  j["sigma_inf_sq"] = sigma_inf_sq(f);
  j["sigma_inf_sq_fourier"] = sigma_inf_sq_fourier(f);
  j["sigma_tau_sq"] = sigma_tau_sq(f, c.tau);
  j["sigma_tau_sq_fourier"] = sigma_tau_sq_fourier(f, c.tau);
  j["sigma_tau_sq_squared_weight"] = sigma_tau_sq_squared_weight(f, c.tau);
  j["sigma_tau_sq_squared_weight_fourier"] = sigma_tau_sq_squared_weight_fourier(f, c.tau);
  j["classical_variance"] = classical_variance(f, c.x_star);
  j["critical_random_variance"] = critical_random_variance(f, c.tau, c.x_star);
  try {
    int p = lowest_nonvanishing_moment(f);
    j["p"] = p;
    j["mu_p"] = moment(f, p);
    j["s_p"] = s_p_variance(f, p, c.tau, c.x_star);
    j["random_boundary_alpha"] = random_boundary_alpha(c.gamma, p);
    j["var_im_xp"] = var_im_xp_prediction(p, c.gamma, c.tau, c.n);
  } catch (const Error& e) {
    j["p"] = json();
    j["s_p_error"] = e.what();
  }
  j["deterministic"] = prediction_json(predict(f, c.alpha, c.gamma, c.tau, c.x_star, false), c.n);
  j["random"] = prediction_json(predict(f, c.alpha, c.gamma, c.tau, c.x_star, true), c.n);
  return j;
}

json kernel_check_report(const ExperimentConfig& c) {
  const Configuration xi = source_configuration(c.xi_source, c.n, master_seed(c));
  const double t = c.t > 0 ? c.t : make_params(static_cast<int>(xi.n()), 0.5, c.gamma, c.tau, c.x_star).t;
  KernelContext ctx = make_kernel_context(xi, t);
  KernelEvaluator K(ctx);
  const int n = ctx.n;
  json j;
  j["n"] = n;
  j["t"] = t;
  j["xi_source"] = c.xi_source;
  Interval I = kernel_support(ctx);
  std::vector<double> br;
  for (double p : ctx.xi.points) br.push_back(ctx.q * p);
  quad::Spec qs;
  qs.epsabs = 1e-12;
  qs.epsrel = 1e-10;
  double trace = quad::integral([&](double x) { return K(x, x); }, I.a, I.b, qs, br);
  j["trace"] = trace;
  j["trace_residual"] = std::abs(trace - n);
  j["reproducing_residual_0_0.1"] = reproducing_residual(K, 0.0, 0.1);
  double s = 0.0;
  for (int k = 0; k <= n; ++k) s += K.phi(0.0, k) * K.psi(0.2, k);
  j["integrable_residual_0_0.2"] = std::abs(s - (0.0 - 0.2) * K(0.0, 0.2));
  j["diagonal_over_n_0"] = K(0.0, 0.0) / n;
  j["semicircle_density_0"] = kEdge / M_PI;
  try {
    SaddleResult sr = saddle_solve(ctx, 0.0);
    j["saddle_omega_0"] = complex_json(sr.omega);
    j["saddle_residual_0"] = sr.residual;
    j["f_second_0"] = complex_json(sr.f_second);
  } catch (const Error& e) {
    j["saddle_error"] = e.what();
  }
  Diagnostics d = regularity_diagnostics(ctx, 0.0);
  j["E1_0"] = d.e1;
  j["E2_0"] = d.e2;
  j["E3_0"] = d.e3;
  return j;
}

json regularity_report(const ExperimentConfig& c) {
  const Configuration xi = source_configuration(c.xi_source, c.n, master_seed(c));
  NetSpec net;
  net.jobs = c.jobs;
  RegularityReport r = check_regularity(xi, std::nullopt, c.A, c.delta, net);
  json j;
  j["n"] = xi.n();
  j["xi_source"] = c.xi_source;
  j["A"] = c.A;
  j["delta"] = c.delta;
  j["sup_value"] = r.sup_value;
  j["threshold"] = r.threshold;
  j["passed"] = r.passed;
  j["argmax_w"] = complex_json(r.argmax_w);
  j["grid_size"] = r.grid_size;
  return j;
}

namespace {

std::string data_path(const ExperimentConfig& c) {
  const bool is_json = c.mode == Mode::theory || c.mode == Mode::kernel_check || c.mode == Mode::regularity;
  return c.output_path + (is_json ? ".json" : ".csv");
}

void write_simulate(const ExperimentConfig& c, std::ostream& out) {
  const TestFunction f = function_by_name(c.function);
  SimParams P = make_params(c.n, c.alpha, c.gamma, c.tau, c.x_star);
  McOptions opts;
  opts.jobs = c.jobs;
  const bool random = c.init == InitKind::random_iid;
  McSummary s = run_mc(P, f, {c.init, {}}, c.trials, master_seed(c), opts);
  RegimePrediction pr = predict(f, c.alpha, c.gamma, c.tau, c.x_star, random);
  csv::Writer w(out);
  w.row({"n", "alpha", "gamma", "tau", "x_star", "t", "function", "init", "n_trials", "mean",
         "variance", "variance_ci_lo", "variance_ci_hi", "skewness", "excess_kurtosis",
         "ks_statistic", "ks_pvalue", "seed", "failures", "predicted_regime",
         "predicted_exponent", "predicted_constant", "predicted_variance"});
  w.field(c.n).field(c.alpha).field(c.gamma).field(c.tau).field(c.x_star).field(P.t);
  w.field(c.function).field(init_name(c.init)).field(s.n_trials).field(s.mean).field(s.variance);
  w.field(s.variance_ci_lo).field(s.variance_ci_hi).field(s.skewness).field(s.excess_kurtosis);
  w.field(s.ks_statistic).field(s.ks_pvalue).field(std::to_string(s.seed)).field(s.failures);
  w.field(regime_name(pr.regime)).field(pr.variance_scale_exponent).field(pr.limit_variance_constant);
  w.field(predicted_variance(pr, c.n));
  w.end_row();
}

std::string utc_timestamp() {
  std::time_t now = std::time(nullptr);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
  return buf;
}

}  // namespace

int run(const ExperimentConfig& c, std::ostream& log) {
  const auto t0 = std::chrono::steady_clock::now();
  const std::string path = data_path(c);
  json manifest;
  manifest["version"] = kVersion;
  manifest["config"] = to_json(c);
  manifest["master_seed"] = master_seed(c);
  manifest["data_file"] = path;
  int status = 0;
  std::string error;
  {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(Errc::io, "cannot write " + path);
    std::ostringstream buf;  // flushed even on failure, with a marker
    try {
      validate(c);
      switch (c.mode) {
        case Mode::simulate: write_simulate(c, buf); break;
        case Mode::sweep: emit_phase_diagram_data(run_sweep(c, &log), buf); break;
        case Mode::theory: buf << theory_report(c).dump(2) << "\n"; break;
        case Mode::kernel_check: buf << kernel_check_report(c).dump(2) << "\n"; break;
        case Mode::regularity: buf << regularity_report(c).dump(2) << "\n"; break;
        case Mode::acceptance: {
          acceptance::Options o;
          o.seed = master_seed(c);
          o.sections = c.sections;
          o.jobs = c.jobs;
          o.progress = &log;
          auto rs = acceptance::run_acceptance(o);
          acceptance::write_csv(rs, buf);
          for (const auto& r : rs)
            if (!r.passed) status = 2;
          break;
        }
      }
    } catch (const std::exception& e) {
      error = e.what();
      status = 1;
      buf << "# FAILED: " << error << "\n";
    }
    out << buf.str();
  }
  manifest["status"] = status == 0 ? "ok" : (status == 2 ? "acceptance_failed" : "error");
  if (!error.empty()) manifest["error"] = error;
  manifest["timestamp"] = utc_timestamp();
  manifest["wall_time_seconds"] =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  std::ofstream mf(c.output_path + ".manifest.json");
  mf << manifest.dump(2) << "\n";
  if (!error.empty()) log << "error: " << error << "\n";
  log << "wrote " << path << "\n";
  return status;
}

int main_entry(int argc, char** argv) {
  CLI::App app{"Mesoscopic fluctuations of Dyson Brownian motion: simulation and theory checks"};
  app.require_subcommand(1);
  std::optional<int> n, trials, jobs;
  std::optional<double> alpha, gamma, tau, xstar;
  std::optional<std::string> function, init, out, config;
  std::optional<std::uint64_t> seed;
  std::vector<std::string> assignments;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--n", n, "matrix size");
    sub->add_option("--alpha", alpha, "mesoscopic scale exponent");
    sub->add_option("--gamma", gamma, "time exponent");
    sub->add_option("--tau", tau, "time constant");
    sub->add_option("--xstar", xstar, "bulk point x*");
    sub->add_option("--function", function, "bump, odd-bump, cauchy or a CSV table");
    sub->add_option("--init", init, "deterministic or random");
    sub->add_option("--trials", trials, "Monte Carlo trials");
    sub->add_option("--seed", seed, "master seed (fallback: MESO_DBM_SEED)");
    sub->add_option("--jobs", jobs, "worker threads");
    sub->add_option("--out", out, "output path stem");
    sub->add_option("--config", config, "JSON config or run manifest");
    sub->add_option("assignments", assignments, "extra key=value settings");
  };
  for (Mode m : {Mode::simulate, Mode::sweep, Mode::theory, Mode::kernel_check, Mode::regularity,
                 Mode::acceptance})
    add_common(app.add_subcommand(mode_name(m)));
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  }
  try {
    ExperimentConfig c;
    c.mode = parse_mode(app.get_subcommands().front()->get_name());
    if (config) {
      c = load_config(*config, c);
      c.mode = parse_mode(app.get_subcommands().front()->get_name());
    }
    for (const auto& kv : assignments) c = apply_assignment(kv, c);
    if (n) c.n = *n;
    if (alpha) c.alpha = *alpha;
    if (gamma) c.gamma = *gamma;
    if (tau) c.tau = *tau;
    if (xstar) c.x_star = *xstar;
    if (function) c.function = *function;
    if (init) c.init = parse_init(*init);
    if (trials) c.trials = *trials;
    if (seed) c.seed = *seed;
    if (jobs) c.jobs = *jobs;
    if (out) c.output_path = *out;
    return run(c, std::cerr);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace meso::cli
