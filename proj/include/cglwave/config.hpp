#pragma once

#include <cstdint>
#include <cstdlib>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "cglwave/experiments.hpp"

namespace cglwave {

// Plain-text key = value configuration, '#' comments, dotted section keys.
// Unknown keys are rejected and all violations are reported together. See
// README for the annotated reference document.

enum class Experiment { simulate, compare, sweep, verify_semigroup, diagnostics };

enum class InitPreset { gaussian_bump, single_mode, random_band };

struct RunConfig {
  Experiment experiment = Experiment::simulate;

  int grid_dim = 1;
  int grid_n = 256;
  double grid_length = default_length();

  double eps = 0.1;
  double kappa = 0.1;
  int s = 0;  // 0: dim default (2 in 1-d, 3 in 2-d)
  double split_R = 1.0;

  Method method = Method::strang_exact;
  double dt = 0.0;  // 0: method default
  double t_end = 1.0;
  int record_stride = 1;
  bool dealias = true;

  InitPreset preset = InitPreset::random_band;
  std::uint64_t seed = 1;
  int max_mode = 8;
  double amplitude = 0.05;
  int mode = 4;         // single_mode preset
  double width = 0.5;   // gaussian_bump preset
  double target_m0 = 0.0;

  LinearModel compare_model = LinearModel::parabolic;
  double compare_t_end_slow = 2.0;
  int compare_samples = 30;

  SweepKind sweep_kind = SweepKind::vary_t;

  int semigroup_xi_points = 64;
  int semigroup_angles = 16;

  int diagnostics_k = 1;

  std::string output_dir;

  GridSpec grid() const { return make_grid(grid_dim, grid_n, grid_length); }
  PerturbationParams params() const {
    return make_params(eps, kappa, s > 0 ? s : default_s(grid_dim), grid_dim,
                       split_R);
  }
  SolverConfig solver() const {
    SolverConfig cfg;
    cfg.method = method;
    cfg.dt = dt > 0.0 ? dt : default_dt(method, grid(), params());
    cfg.t_end = t_end;
    cfg.record_stride = record_stride;
    cfg.dealias = dealias;
    return cfg;
  }
};

namespace detail {

inline const std::set<std::string>& known_keys() {
  static const std::set<std::string> keys = {
      "experiment",      "grid.dim",          "grid.n",
      "grid.length",     "params.eps",        "params.kappa",
      "params.s",        "params.split_R",    "solver.method",
      "solver.dt",       "solver.t_end",      "solver.record_stride",
      "solver.dealias",  "init.preset",       "init.seed",
      "init.max_mode",   "init.amplitude",    "init.mode",
      "init.width",      "init.target_m0",    "compare.model",
      "compare.t_end_slow", "compare.samples", "sweep.kind",
      "semigroup.xi_points", "semigroup.angles", "diagnostics.k",
      "output.dir"};
  return keys;
}

inline std::string trim(const std::string& s) {
  auto b = s.find_first_not_of(" \t\r");
  auto e = s.find_last_not_of(" \t\r");
  return b == std::string::npos ? "" : s.substr(b, e - b + 1);
}

struct ConfigReader {
  std::map<std::string, std::string> kv;
  std::vector<std::string>& errors;

  bool has(const std::string& k) const { return kv.count(k) > 0; }

  template <typename Fn>
  void with(const std::string& k, Fn&& fn) {
    auto it = kv.find(k);
    if (it == kv.end()) return;
    try {
      fn(it->second);
    } catch (const std::exception& e) {
      errors.push_back(k + ": " + e.what());
    }
  }

  double num(const std::string& v) {
    std::size_t pos = 0;
    double x = std::stod(v, &pos);
    if (pos != v.size()) throw config_error("not a number: '" + v + "'");
    return x;
  }
  long integer(const std::string& v) {
    std::size_t pos = 0;
    long x = std::stol(v, &pos);
    if (pos != v.size()) throw config_error("not an integer: '" + v + "'");
    return x;
  }
  bool boolean(const std::string& v) {
    if (v == "true") return true;
    if (v == "false") return false;
    throw config_error("expected true/false, got '" + v + "'");
  }
};

}  // namespace detail

inline std::string to_string(Experiment e) {
  switch (e) {
    case Experiment::simulate: return "simulate";
    case Experiment::compare: return "compare";
    case Experiment::sweep: return "sweep";
    case Experiment::verify_semigroup: return "verify-semigroup";
    default: return "diagnostics";
  }
}

inline std::string to_string(Method m) {
  switch (m) {
    case Method::strang_exact: return "strang_exact";
    case Method::rk4_reference: return "rk4_reference";
    default: return "bv_direct";
  }
}

inline std::string to_string(InitPreset p) {
  switch (p) {
    case InitPreset::gaussian_bump: return "gaussian_bump";
    case InitPreset::single_mode: return "single_mode";
    default: return "random_band";
  }
}

inline std::string to_string(SweepKind k) {
  switch (k) {
    case SweepKind::halve_eps_fixed_nu: return "halve_eps_fixed_nu";
    case SweepKind::halve_eps_fixed_kappa: return "halve_eps_fixed_kappa";
    default: return "vary_t";
  }
}

// Parses and cross-validates a configuration document. Throws config_error
// listing every violation, not just the first. The experiment key is
// required unless the caller supplies a fallback (the CLI passes the
// subcommand here).
inline RunConfig parse_config(
    const std::string& text,
    std::optional<Experiment> fallback_experiment = std::nullopt) {
  std::vector<std::string> errors;
  detail::ConfigReader r{{}, errors};

  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = detail::trim(line);
    if (line.empty()) continue;
    auto eq = line.find('=');
    if (eq == std::string::npos) {
      errors.push_back("line " + std::to_string(lineno) +
                       ": expected 'key = value', got '" + line + "'");
      continue;
    }
    std::string key = detail::trim(line.substr(0, eq));
    std::string val = detail::trim(line.substr(eq + 1));
    if (!detail::known_keys().count(key)) {
      errors.push_back("unknown key '" + key + "'");
      continue;
    }
    if (r.kv.count(key)) errors.push_back("duplicate key '" + key + "'");
    r.kv[key] = val;
  }

  RunConfig rc;
  if (!r.has("experiment")) {
    if (fallback_experiment)
      rc.experiment = *fallback_experiment;
    else
      errors.push_back("missing required key 'experiment'");
  }
  r.with("experiment", [&](const std::string& v) {
    if (v == "simulate") rc.experiment = Experiment::simulate;
    else if (v == "compare") rc.experiment = Experiment::compare;
    else if (v == "sweep") rc.experiment = Experiment::sweep;
    else if (v == "verify-semigroup") rc.experiment = Experiment::verify_semigroup;
    else if (v == "diagnostics") rc.experiment = Experiment::diagnostics;
    else throw config_error("unknown experiment '" + v + "'");
  });
  r.with("grid.dim", [&](const std::string& v) { rc.grid_dim = static_cast<int>(r.integer(v)); });
  r.with("grid.n", [&](const std::string& v) { rc.grid_n = static_cast<int>(r.integer(v)); });
  r.with("grid.length", [&](const std::string& v) { rc.grid_length = r.num(v); });
  r.with("params.eps", [&](const std::string& v) { rc.eps = r.num(v); });
  r.with("params.kappa", [&](const std::string& v) { rc.kappa = r.num(v); });
  r.with("params.s", [&](const std::string& v) { rc.s = static_cast<int>(r.integer(v)); });
  r.with("params.split_R", [&](const std::string& v) { rc.split_R = r.num(v); });
  r.with("solver.method", [&](const std::string& v) {
    if (v == "strang_exact") rc.method = Method::strang_exact;
    else if (v == "rk4_reference") rc.method = Method::rk4_reference;
    else if (v == "bv_direct") rc.method = Method::bv_direct;
    else throw config_error("unknown method '" + v + "'");
  });
  r.with("solver.dt", [&](const std::string& v) { rc.dt = r.num(v); });
  r.with("solver.t_end", [&](const std::string& v) { rc.t_end = r.num(v); });
  r.with("solver.record_stride", [&](const std::string& v) { rc.record_stride = static_cast<int>(r.integer(v)); });
  r.with("solver.dealias", [&](const std::string& v) { rc.dealias = r.boolean(v); });
  r.with("init.preset", [&](const std::string& v) {
    if (v == "gaussian_bump") rc.preset = InitPreset::gaussian_bump;
    else if (v == "single_mode") rc.preset = InitPreset::single_mode;
    else if (v == "random_band") rc.preset = InitPreset::random_band;
    else throw config_error("unknown preset '" + v + "'");
  });
  r.with("init.seed", [&](const std::string& v) { rc.seed = static_cast<std::uint64_t>(r.integer(v)); });
  r.with("init.max_mode", [&](const std::string& v) { rc.max_mode = static_cast<int>(r.integer(v)); });
  r.with("init.amplitude", [&](const std::string& v) { rc.amplitude = r.num(v); });
  r.with("init.mode", [&](const std::string& v) { rc.mode = static_cast<int>(r.integer(v)); });
  r.with("init.width", [&](const std::string& v) { rc.width = r.num(v); });
  r.with("init.target_m0", [&](const std::string& v) { rc.target_m0 = r.num(v); });
  r.with("compare.model", [&](const std::string& v) {
    if (v == "damped_wave") rc.compare_model = LinearModel::damped_wave;
    else if (v == "parabolic") rc.compare_model = LinearModel::parabolic;
    else throw config_error("unknown model '" + v + "'");
  });
  r.with("compare.t_end_slow", [&](const std::string& v) { rc.compare_t_end_slow = r.num(v); });
  r.with("compare.samples", [&](const std::string& v) { rc.compare_samples = static_cast<int>(r.integer(v)); });
  r.with("sweep.kind", [&](const std::string& v) {
    if (v == "halve_eps_fixed_nu") rc.sweep_kind = SweepKind::halve_eps_fixed_nu;
    else if (v == "halve_eps_fixed_kappa") rc.sweep_kind = SweepKind::halve_eps_fixed_kappa;
    else if (v == "vary_t") rc.sweep_kind = SweepKind::vary_t;
    else throw config_error("unknown sweep kind '" + v + "'");
  });
  r.with("semigroup.xi_points", [&](const std::string& v) { rc.semigroup_xi_points = static_cast<int>(r.integer(v)); });
  r.with("semigroup.angles", [&](const std::string& v) { rc.semigroup_angles = static_cast<int>(r.integer(v)); });
  r.with("diagnostics.k", [&](const std::string& v) { rc.diagnostics_k = static_cast<int>(r.integer(v)); });
  r.with("output.dir", [&](const std::string& v) { rc.output_dir = v; });

  if (rc.output_dir.empty()) {
    const char* root = std::getenv("CGLWAVE_OUT_ROOT");
    rc.output_dir = root ? root : "out";
  }

  // cross-field validation, re-checking the module-level constraints here so
  // a bad document reports everything at once with actionable messages
  if (rc.grid_dim != 1 && rc.grid_dim != 2)
    errors.push_back("grid.dim must be 1 or 2");
  else {
    if (!is_power_of_two(rc.grid_n) || rc.grid_n < 16)
      errors.push_back("grid.n must be a power of two >= 16");
    if (!(rc.grid_length > 0)) errors.push_back("grid.length must be positive");
    if (!(rc.eps > 0.0) || rc.eps > 1.0)
      errors.push_back("eps must be in (0,1]");
    if (!(rc.kappa > 0.0) || rc.kappa >= 1.0)
      errors.push_back("kappa must be in (0,1)");
    int s_eff = rc.s > 0 ? rc.s : default_s(rc.grid_dim);
    if (2 * s_eff <= 2 + rc.grid_dim)
      errors.push_back("params.s must satisfy s > 1 + dim/2");
    if (rc.split_R < 1.0) errors.push_back("params.split_R must be >= 1");
  }
  if (!(rc.t_end > 0.0)) errors.push_back("solver.t_end must be positive");
  if (rc.dt < 0.0) errors.push_back("solver.dt must be positive (or omitted)");
  if (rc.record_stride < 1) errors.push_back("solver.record_stride must be >= 1");
  if (rc.max_mode < 1 || rc.max_mode >= rc.grid_n / 2)
    errors.push_back("init.max_mode must be in [1, n/2)");
  if (rc.amplitude < 0.0) errors.push_back("init.amplitude must be >= 0");
  if (rc.experiment == Experiment::verify_semigroup &&
      rc.kappa >= kappa0())
    errors.push_back(
        "verify-semigroup requires kappa < kappa0 = sqrt(8/9) ~= 0.9428 "
        "(low-band discriminant positivity)");
  if (rc.experiment == Experiment::compare || rc.experiment == Experiment::sweep) {
    if (rc.compare_samples < 1) errors.push_back("compare.samples must be >= 1");
    if (!(rc.compare_t_end_slow > 0.0))
      errors.push_back("compare.t_end_slow must be positive");
  }
  if (rc.diagnostics_k < 1) errors.push_back("diagnostics.k must be >= 1");
  if (rc.dt > 0.0 && rc.method == Method::rk4_reference && errors.empty()) {
    double bound = rk4_stability_dt(rc.grid(), rc.params());
    if (rc.dt > bound)
      errors.push_back("solver.dt exceeds the rk4 stability bound " +
                       std::to_string(bound));
  }

  if (!errors.empty()) {
    std::string msg = "configuration invalid:";
    for (const auto& e : errors) msg += "\n  - " + e;
    throw config_error(msg);
  }
  return rc;
}

// canonical echo of the effective configuration (defaults filled in)
inline std::string effective_config_text(const RunConfig& rc) {
  std::ostringstream out;
  out.precision(17);
  out << "experiment = " << to_string(rc.experiment) << "\n"
      << "grid.dim = " << rc.grid_dim << "\n"
      << "grid.n = " << rc.grid_n << "\n"
      << "grid.length = " << rc.grid_length << "\n"
      << "params.eps = " << rc.eps << "\n"
      << "params.kappa = " << rc.kappa << "\n"
      << "params.s = " << (rc.s > 0 ? rc.s : default_s(rc.grid_dim)) << "\n"
      << "params.split_R = " << rc.split_R << "\n"
      << "solver.method = " << to_string(rc.method) << "\n"
      << "solver.dt = " << rc.solver().dt << "\n"
      << "solver.t_end = " << rc.t_end << "\n"
      << "solver.record_stride = " << rc.record_stride << "\n"
      << "solver.dealias = " << (rc.dealias ? "true" : "false") << "\n"
      << "init.preset = " << to_string(rc.preset) << "\n"
      << "init.seed = " << rc.seed << "\n"
      << "init.max_mode = " << rc.max_mode << "\n"
      << "init.amplitude = " << rc.amplitude << "\n"
      << "init.mode = " << rc.mode << "\n"
      << "init.width = " << rc.width << "\n"
      << "init.target_m0 = " << rc.target_m0 << "\n"
      << "compare.model = " << to_string(rc.compare_model) << "\n"
      << "compare.t_end_slow = " << rc.compare_t_end_slow << "\n"
      << "compare.samples = " << rc.compare_samples << "\n"
      << "sweep.kind = " << to_string(rc.sweep_kind) << "\n"
      << "semigroup.xi_points = " << rc.semigroup_xi_points << "\n"
      << "semigroup.angles = " << rc.semigroup_angles << "\n"
      << "diagnostics.k = " << rc.diagnostics_k << "\n"
      << "output.dir = " << rc.output_dir << "\n";
  return out.str();
}

// initial data presets; target_m0 > 0 rescales (a0, phi0) jointly, which is
// exact by the homogeneity M0(lambda a, lambda phi) = lambda M0(a, phi)
inline std::pair<Field, Field> make_initial_data(const RunConfig& rc) {
  GridSpec g = rc.grid();
  PerturbationParams p = rc.params();
  Field a0(g, Rep::physical, true), phi0(g, Rep::physical, true);
  switch (rc.preset) {
    case InitPreset::gaussian_bump: {
      const double w2 = rc.width * rc.width;
      for (std::size_t i = 0; i < a0.size(); ++i) {
        double v = 1.0;
        for (int ax = 0; ax < g.dim; ++ax) {
          double th = 2.0 * std::numbers::pi *
                      (g.coordinate(i, ax) / g.length - 0.5);
          v *= std::exp((std::cos(th) - 1.0) / w2);
        }
        a0[i] = rc.amplitude * v;
      }
      break;
    }
    case InitPreset::single_mode: {
      const double k = 2.0 * std::numbers::pi * rc.mode / g.length;
      for (std::size_t i = 0; i < a0.size(); ++i) {
        double x = g.coordinate(i, 0);
        a0[i] = rc.amplitude * std::cos(k * x);
        phi0[i] = 0.5 * rc.amplitude * std::sin(k * x);
      }
      break;
    }
    case InitPreset::random_band: {
      a0 = band_limited_random(g, rc.max_mode, rc.amplitude, p.s, rc.seed);
      phi0 =
          band_limited_random(g, rc.max_mode, rc.amplitude, p.s, rc.seed + 1);
      break;
    }
  }
  if (rc.target_m0 > 0.0) {
    double m0 = compute_M0(a0, phi0, p);
    if (m0 > 0.0) {
      a0 = a0 * (rc.target_m0 / m0);
      phi0 = phi0 * (rc.target_m0 / m0);
    }
  }
  return {std::move(a0), std::move(phi0)};
}

}  // namespace cglwave
