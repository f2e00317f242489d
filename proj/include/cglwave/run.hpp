#pragma once

#include <chrono>
#include <filesystem>
#include <iostream>
#include <sstream>

#include "cglwave/io.hpp"

namespace cglwave {

inline constexpr const char* kVersion = "cglwave 0.1.0";

// exit codes: 0 ok, 2 config error, 3 regime violation, 4 numerical instability
enum ExitCode {
  kExitOk = 0,
  kExitConfig = 2,
  kExitRegime = 3,
  kExitInstability = 4
};

struct Artifact {
  std::string kind;  // "csv", "json", "snapshot", "plotdata"
  std::string path;
  bool truncated = false;
};

struct RunResult {
  int exit_code = kExitOk;
  std::vector<Artifact> artifacts;
  std::string message;
};

namespace detail {

inline std::string run_tag(const RunConfig& rc) {
  std::ostringstream tag;
  tag << "eps" << rc.eps << "_kappa" << rc.kappa << "_n" << rc.grid_n
      << "_seed" << rc.seed;
  return tag.str();
}

inline int exit_code_for(AbortReason a) {
  switch (a) {
    case AbortReason::none: return kExitOk;
    case AbortReason::instability: return kExitInstability;
    default: return kExitRegime;
  }
}

inline const char* abort_name(AbortReason a) {
  switch (a) {
    case AbortReason::none: return "none";
    case AbortReason::regime_violation: return "regime_violation";
    case AbortReason::vanishing_risk: return "vanishing_risk";
    default: return "instability";
  }
}

}  // namespace detail

// Human-readable summary of a finished run. Comparison summaries get their
// fitted-slope table rendered; truncated artifacts are flagged. Plot-ready
// two-column .dat files are produced by the experiments themselves and show
// up here as artifacts.
inline void emit_report(const std::vector<Artifact>& artifacts,
                        std::ostream& out) {
  if (artifacts.empty()) return;
  out << "artifacts:\n";
  for (const auto& a : artifacts)
    out << "  [" << a.kind << "] " << a.path
        << (a.truncated ? "  (truncated run)" : "") << "\n";
  for (const auto& a : artifacts) {
    if (a.kind != "json") continue;
    std::string name = std::filesystem::path(a.path).filename().string();
    if (!name.starts_with("compare_")) continue;
    std::ifstream in(a.path);
    if (!in) continue;
    nlohmann::json j = nlohmann::json::parse(in, nullptr, false);
    if (j.is_discarded() || !j.contains("fits")) continue;
    out << "fitted slopes (" << j.value("model", std::string("?")) << "):\n";
    for (const auto& f : j["fits"])
      out << "  m=" << f.value("m", -1) << "  slope="
          << f.value("slope", 0.0) << " +- " << f.value("slope_stderr", 0.0)
          << (f.value("inconclusive", false) ? "  (inconclusive)" : "")
          << "\n";
  }
}

namespace detail {

inline void write_plotdata(const std::string& path,
                           const std::vector<double>& x,
                           const std::vector<double>& y) {
  std::ofstream out(path);
  for (std::size_t i = 0; i < x.size() && i < y.size(); ++i)
    out << format_g17(x[i]) << " " << format_g17(y[i]) << "\n";
}

inline RunResult run_simulate(const RunConfig& rc, const std::string& dir,
                              bool quiet) {
  RunResult res;
  auto [a0, phi0] = make_initial_data(rc);
  PerturbationParams p = rc.params();
  SolverConfig cfg = rc.solver();
  const std::string tag = run_tag(rc);

  if (!quiet) std::cout << "time,energy,min_abs_psi\n";
  ProgressCallback progress;
  if (!quiet)
    progress = [](double t, double e, double m) {
      std::cout << format_g17(t) << "," << format_g17(e) << ","
                << format_g17(m) << "\n";
    };

  if (rc.method == Method::bv_direct) {
    Field psi0 = build_psi(a0, phi0, p);
    HydroState h0 = extract_hydro(psi0, p, 0.0);
    BvTrajectory traj = integrate_bv(h0.b, h0.v, cfg, p);
    std::string csv = dir + "/simulate_bv_" + tag + ".csv";
    CsvWriter w(csv, {"time", "hs_norm_b", "hs_norm_v"});
    for (const auto& s : traj.snapshots)
      w.row_numeric(
          {s.time, sobolev_norm(s.b, p.s), sobolev_norm(s.v, p.s)});
    res.artifacts.push_back({"csv", csv, traj.truncated()});
    if (!traj.snapshots.empty()) {
      std::string snap = dir + "/final_b_" + tag;
      write_field_snapshot(snap, traj.snapshots.back().b, "b", p,
                           traj.snapshots.back().time);
      res.artifacts.push_back({"snapshot", snap + ".bin", false});
    }
    res.exit_code = exit_code_for(traj.abort);
    res.message = traj.truncated() ? traj.abort_detail : "ok";
    return res;
  }

  Field psi0 = build_psi(a0, phi0, p);
  std::string snap0 = dir + "/initial_psi_" + tag;
  write_field_snapshot(snap0, psi0, "psi", p, 0.0);
  res.artifacts.push_back({"snapshot", snap0 + ".bin", false});

  Trajectory traj = integrate(psi0, cfg, p, progress);
  traj.seed = rc.seed;

  std::string csv = dir + "/simulate_" + tag + ".csv";
  CsvWriter w(csv, {"time", "energy", "min_abs_psi", "sup_mod2_dev"});
  for (const auto& d : traj.diagnostics)
    w.row_numeric({d.time, d.energy, d.min_abs_psi, d.sup_mod2_dev});
  res.artifacts.push_back({"csv", csv, traj.truncated()});

  std::string hs_csv = dir + "/simulate_hs_" + tag + ".csv";
  CsvWriter wh(hs_csv, {"time", "hs_norm_bz", "gamma0", "energy"});
  for (const auto& s : traj.snapshots) {
    try {
      HydroState h = extract_hydro(s.psi, p, s.time);
      wh.row_numeric({s.time, pair_sobolev_norm(h.b, h.z, p.s),
                      gamma_seminorm(h.b, h.z, 0, p),
                      gl_energy(s.psi, p)});
    } catch (const regime_violation&) {
      break;  // extraction unsafe past an abort; keep the rows so far
    }
  }
  res.artifacts.push_back({"csv", hs_csv, traj.truncated()});

  if (!traj.snapshots.empty()) {
    std::string snap = dir + "/final_psi_" + tag;
    write_field_snapshot(snap, to_physical(traj.snapshots.back().psi), "psi",
                         p, traj.snapshots.back().time);
    res.artifacts.push_back({"snapshot", snap + ".bin", false});
  }

  std::vector<double> ts, es;
  for (const auto& d : traj.diagnostics) {
    ts.push_back(d.time);
    es.push_back(d.energy);
  }
  std::string plot = dir + "/energy_" + tag + ".dat";
  write_plotdata(plot, ts, es);
  res.artifacts.push_back({"plotdata", plot, false});

  res.exit_code = exit_code_for(traj.abort);
  res.message = traj.truncated()
                    ? std::string(abort_name(traj.abort)) + ": " +
                          traj.abort_detail
                    : "ok";
  return res;
}

inline RunResult run_compare(const RunConfig& rc, const std::string& dir,
                             bool /*quiet*/) {
  RunResult res;
  auto [a0, phi0] = make_initial_data(rc);
  PerturbationParams p = rc.params();
  ComparisonResult r =
      run_comparison(a0, phi0, p, rc.compare_model, rc.compare_t_end_slow,
                     rc.compare_samples, rc.dt, rc.method);

  const std::string tag = run_tag(rc);
  std::string csv = dir + "/compare_" + tag + ".csv";
  CsvWriter w(csv, {"time", "m", "model", "error"});
  for (std::size_t i = 0; i < r.times.size(); ++i)
    for (int j = 0; j < 3; ++j)
      w.row({format_g17(r.times[i]), std::to_string(r.orders[j]),
             to_string(r.model), format_g17(r.errors[j][i])});
  res.artifacts.push_back({"csv", csv, r.truncated});

  nlohmann::json fits = nlohmann::json::array();
  for (int j = 0; j < 3; ++j) {
    auto ft = final_third(r.times);
    auto fe = final_third(r.errors[j]);
    ScalingFit fit = fit_loglog(ft, fe, "t");
    fit.window = "final third of slow-frame window";
    nlohmann::json jf = to_json(fit);
    jf["m"] = r.orders[j];
    fits.push_back(jf);

    std::string plot =
        dir + "/compare_m" + std::to_string(r.orders[j]) + "_" + tag + ".dat";
    write_plotdata(plot, r.times, r.errors[j]);
    res.artifacts.push_back({"plotdata", plot, false});
  }
  nlohmann::json summary{{"model", to_string(r.model)},
                         {"M0", r.M0},
                         {"truncated", r.truncated},
                         {"regime_warning", r.regime_warning},
                         {"fits", fits}};
  std::string js = dir + "/compare_" + tag + ".json";
  std::ofstream(js) << summary.dump(2) << "\n";
  res.artifacts.push_back({"json", js, r.truncated});

  res.exit_code = r.truncated ? kExitRegime : kExitOk;
  res.message = r.truncated ? "comparison truncated" : "ok";
  return res;
}

inline RunResult run_sweep(const RunConfig& rc, const std::string& dir,
                           bool quiet) {
  RunResult res;
  SweepConfig sc;
  sc.grid = rc.grid();
  sc.base = rc.params();
  sc.model = rc.compare_model;
  sc.t_end_slow = rc.compare_t_end_slow;
  sc.n_samples = rc.compare_samples;
  sc.dt = rc.dt;
  sc.seed = rc.seed;
  sc.max_mode = rc.max_mode;
  sc.target_m0 = rc.target_m0;
  ScalingFit fit = sweep_and_fit(sc, rc.sweep_kind);

  nlohmann::json j = to_json(fit);
  j["kind"] = to_string(rc.sweep_kind);
  std::string js = dir + "/sweep_" + run_tag(rc) + ".json";
  std::ofstream(js) << j.dump(2) << "\n";
  res.artifacts.push_back({"json", js, false});
  if (!quiet)
    std::cout << "sweep " << to_string(rc.sweep_kind) << ": slope "
              << fit.slope << " +- " << fit.slope_stderr
              << (fit.inconclusive ? " (inconclusive)" : "") << "\n";
  res.message = fit.inconclusive ? "inconclusive" : "ok";
  return res;
}

inline RunResult run_verify_semigroup(const RunConfig& rc,
                                      const std::string& dir, bool quiet) {
  RunResult res;
  PerturbationParams p = rc.params();
  BoundReport rep = verify_semigroup_bounds(
      p, standard_xi_grid(rc.semigroup_xi_points), standard_t_grid(p),
      rc.semigroup_angles);
  std::string js = dir + "/semigroup_" + run_tag(rc) + ".json";
  std::ofstream(js) << to_json(rep).dump(2) << "\n";
  res.artifacts.push_back({"json", js, false});
  if (!quiet)
    std::cout << "low band: C=" << rep.low.C << " c=" << rep.low.c
              << "; high band: C=" << rep.high.C << "\n";
  if (!rep.low.feasible || !rep.high.feasible) {
    res.exit_code = kExitRegime;
    res.message = "envelope infeasible";
  }
  return res;
}

inline RunResult run_diagnostics(const RunConfig& rc, const std::string& dir,
                                 bool quiet) {
  RunResult res;
  auto [a0, phi0] = make_initial_data(rc);
  PerturbationParams p = rc.params();
  SolverConfig cfg = rc.solver();
  Field psi0 = build_psi(a0, phi0, p);
  Trajectory traj = integrate(psi0, cfg, p);
  traj.seed = rc.seed;
  const std::string tag = run_tag(rc);

  auto rbz = residual_bz(traj, p);
  auto rbv = residual_bv_reformulated(traj, p);
  std::string rcsv = dir + "/residuals_" + tag + ".csv";
  CsvWriter w(rcsv, {"time", "system", "res_b", "res_vec", "combined"});
  for (const auto& s : rbz)
    w.row({format_g17(s.time), "bz", format_g17(s.res_b),
           format_g17(s.res_vec), format_g17(s.combined)});
  for (const auto& s : rbv)
    w.row({format_g17(s.time), "bv", format_g17(s.res_b),
           format_g17(s.res_vec), format_g17(s.combined)});
  res.artifacts.push_back({"csv", rcsv, traj.truncated()});

  auto mon = energy_inequality_monitor(traj, p, rc.diagnostics_k);
  std::string mcsv = dir + "/monitor_" + tag + ".csv";
  CsvWriter wm(mcsv, {"time", "lhs", "rhs", "running_K", "L", "anomaly"});
  bool anomaly = false;
  for (const auto& s : mon) {
    wm.row({format_g17(s.time), format_g17(s.lhs), format_g17(s.rhs),
            format_g17(s.running_K), format_g17(s.L),
            s.anomaly ? "1" : "0"});
    anomaly = anomaly || s.anomaly;
  }
  res.artifacts.push_back({"csv", mcsv, traj.truncated()});

  ControlSeries ctrl = control_function(traj, p, compute_M0(a0, phi0, p));
  std::string ccsv = dir + "/control_" + tag + ".csv";
  CsvWriter wc(ccsv,
               {"time", "H", "sup_hs", "l2t_hs", "l2t_binf", "H_over_M0"});
  for (std::size_t i = 0; i < ctrl.times.size(); ++i)
    wc.row_numeric({ctrl.times[i], ctrl.H[i], ctrl.sup_hs[i], ctrl.l2t_hs[i],
                    ctrl.l2t_binf[i],
                    ctrl.M0 > 0 ? ctrl.H[i] / ctrl.M0 : 0.0});
  res.artifacts.push_back({"csv", ccsv, traj.truncated()});

  nlohmann::json summary{
      {"M0", ctrl.M0},
      {"H_final", ctrl.H.empty() ? 0.0 : ctrl.H.back()},
      {"running_K", mon.empty() ? 0.0 : mon.back().running_K},
      {"anomaly", anomaly},
      {"truncated", traj.truncated()},
      {"abort", abort_name(traj.abort)}};
  std::string js = dir + "/diagnostics_" + tag + ".json";
  std::ofstream(js) << summary.dump(2) << "\n";
  res.artifacts.push_back({"json", js, traj.truncated()});

  if (!quiet)
    std::cout << "diagnostics: K=" << summary["running_K"]
              << " H(T)/M0=" << (ctrl.M0 > 0 ? ctrl.H.back() / ctrl.M0 : 0.0)
              << "\n";
  res.exit_code = exit_code_for(traj.abort);
  res.message = traj.truncated() ? traj.abort_detail : "ok";
  return res;
}

}  // namespace detail

// Dispatches the configured experiment, writes its artifacts plus a
// reproducibility manifest, and reports the exit status. Aborted experiments
// still write their partial artifacts and the manifest.
inline RunResult run(const RunConfig& rc, bool quiet = false) {
  namespace fs = std::filesystem;
  const auto t0 = std::chrono::steady_clock::now();
  fs::create_directories(rc.output_dir);
  const std::string dir = rc.output_dir;

  // an aborted experiment still gets its diagnostic report and manifest
  RunResult res;
  try {
    switch (rc.experiment) {
      case Experiment::simulate:
        res = detail::run_simulate(rc, dir, quiet);
        break;
      case Experiment::compare:
        res = detail::run_compare(rc, dir, quiet);
        break;
      case Experiment::sweep:
        res = detail::run_sweep(rc, dir, quiet);
        break;
      case Experiment::verify_semigroup:
        res = detail::run_verify_semigroup(rc, dir, quiet);
        break;
      case Experiment::diagnostics:
        res = detail::run_diagnostics(rc, dir, quiet);
        break;
    }
  } catch (const config_error&) {
    throw;
  } catch (const vanishing_risk& e) {
    res.exit_code = kExitRegime;
    res.message = std::string("vanishing risk: ") + e.what();
    nlohmann::json report{{"error", "vanishing_risk"},
                          {"what", e.what()},
                          {"min_abs_psi", e.min_abs_psi},
                          {"grid_index", e.grid_index},
                          {"time", e.time}};
    std::ofstream(dir + "/abort_" + detail::run_tag(rc) + ".json")
        << report.dump(2) << "\n";
  } catch (const regime_violation& e) {
    res.exit_code = kExitRegime;
    res.message = std::string("regime violation: ") + e.what();
    nlohmann::json report{
        {"error", "regime_violation"}, {"what", e.what()}, {"time", e.time}};
    std::ofstream(dir + "/abort_" + detail::run_tag(rc) + ".json")
        << report.dump(2) << "\n";
  } catch (const numerical_instability& e) {
    res.exit_code = kExitInstability;
    res.message = std::string("numerical instability: ") + e.what();
    nlohmann::json report{{"error", "numerical_instability"},
                          {"what", e.what()},
                          {"time", e.time},
                          {"norm", e.norm_at_failure}};
    std::ofstream(dir + "/abort_" + detail::run_tag(rc) + ".json")
        << report.dump(2) << "\n";
  }

  const double wall =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
          .count();
  nlohmann::json manifest{{"version", kVersion},
                          {"experiment", to_string(rc.experiment)},
                          {"seed", rc.seed},
                          {"wall_time_sec", wall},
                          {"exit_code", res.exit_code},
                          {"message", res.message},
                          {"config", effective_config_text(rc)}};
  nlohmann::json arts = nlohmann::json::array();
  for (const auto& a : res.artifacts)
    arts.push_back({{"kind", a.kind}, {"path", a.path},
                    {"truncated", a.truncated}});
  manifest["artifacts"] = arts;
  std::ofstream(dir + "/manifest_" + detail::run_tag(rc) + ".json")
      << manifest.dump(2) << "\n";

  if (!quiet) emit_report(res.artifacts, std::cout);
  return res;
}

}  // namespace cglwave
