// Acceptance suite: one pass/fail line per criterion, nonzero exit on any
// failure. Desk scale: dim=1 at n=256 plus a 2-d smoke subset at n=64^2.

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <vector>

#include "cglwave/cglwave.hpp"
#include "oracles.hpp"

using namespace cglwave;

namespace {

int g_failures = 0;

void report(int number, const char* label, bool pass, const std::string& qoi) {
  std::printf("%s criterion %2d: %s  %s\n", pass ? "PASS" : "FAIL", number,
              label, qoi.c_str());
  if (!pass) ++g_failures;
}

std::string fmt(const char* pattern, double a, double b = 0.0) {
  char buf[160];
  std::snprintf(buf, sizeof buf, pattern, a, b);
  return buf;
}

std::pair<Field, Field> seeded_data(const GridSpec& g,
                                    const PerturbationParams& p,
                                    std::uint64_t seed, double target_m0) {
  Field a0 = band_limited_random(g, 8, 1.0, p.s, seed);
  Field phi0 = band_limited_random(g, 8, 1.0, p.s, seed + 1000);
  double m0 = compute_M0(a0, phi0, p);
  return {a0 * (target_m0 / m0), phi0 * (target_m0 / m0)};
}

// --- criterion 1: closed-form semigroup vs scaling-and-squaring oracle ---

void criterion_1() {
  double worst = 0.0, worst_deg = 0.0;
  int degenerate_points = 0;
  for (double eps : {0.05, 0.1, 0.2}) {
    for (int kc = 0; kc < 3; ++kc) {
      double kappa = kc == 0 ? eps / 2 : (kc == 1 ? eps : std::sqrt(eps));
      PerturbationParams p = make_params(eps, kappa, 2, 1);
      for (double t : standard_t_grid(p)) {
        for (double xi : log_spaced(1e-2, 1e3, 40)) {
          TwoByTwoFlow f = mode_matrix_cd(xi, p);
          double scale = std::exp(-t * oracles::min_decay_rate(f)) + 1e-280;
          double d = oracles::entry_distance(
              semigroup_closed_form(f, t),
              oracles::expm_squaring(f.p, f.q, f.r, t));
          worst = std::max(worst, d / scale);
        }
        // points straddling the degenerate locus |Delta| < 1e-4
        double nu = p.nu();
        double X = (-1.0 + std::sqrt(1.0 + eps * eps * nu * nu)) / (eps * eps);
        double xis = std::sqrt(X);
        for (int j = -5; j <= 5; ++j) {
          double xi = xis * (1.0 + j * 4e-6);
          ModePropagator mp = make_mode_propagator(xi, p);
          if (std::abs(mp.disc) >= 1e-4) continue;
          ++degenerate_points;
          double scale =
              std::exp(-t * oracles::min_decay_rate(mp.matrix)) + 1e-280;
          double d = oracles::entry_distance(
              semigroup_closed_form(mp.matrix, t),
              oracles::expm_squaring(mp.matrix.p, mp.matrix.q, mp.matrix.r,
                                     t));
          worst_deg = std::max(worst_deg, d / scale);
        }
      }
    }
  }
  bool pass = worst <= 1e-10 && worst_deg <= 1e-8 && degenerate_points >= 200;
  report(1, "semigroup closed form vs squaring oracle", pass,
         fmt("(sweep %.2e <= 1e-10, degenerate %.2e <= 1e-8, ", worst,
             worst_deg) +
             std::to_string(degenerate_points) + " pts >= 200)");
}

// --- criterion 2: identity suite over 20 seeded regime states ---

void criterion_2() {
  GridSpec g = make_grid(1, 256, default_length());
  PerturbationParams p = make_params(0.1, 0.1, 2, 1);
  double worst_gamma = 0.0, worst_gain = 0.0, worst_z = 0.0, worst_zz = 0.0;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    auto [a0, phi0] = seeded_data(g, p, seed, 0.09);
    Field psi = build_psi(a0, phi0, p);
    HydroState h = extract_hydro(psi, p, 0.0);

    double gamma0 = gamma_seminorm(h.b, h.z, 0, p);
    double e8 = 8.0 * gl_energy(psi, p);
    worst_gamma = std::max(worst_gamma, std::abs(gamma0 - e8) / e8);
    worst_gain = std::max(
        worst_gain, gain_derivative_residual(h, p) / sobolev_norm(h.b, 1.0));
    worst_z = std::max(worst_z, z_identity_residual(h));
    for (int a = 0; a < g.dim; ++a) {
      Field zp = to_physical(h.z.comp[a]);
      for (std::size_t i = 0; i < zp.size(); ++i) {
        cplx sq = zp[i] * zp[i];
        double re = zp[i].real(), im = zp[i].imag();
        worst_zz =
            std::max(worst_zz, std::abs(sq.real() - (re * re - im * im)));
      }
    }
  }
  bool pass = worst_gamma <= 1e-10 && worst_gain <= 1e-8 && worst_z <= 1e-8 &&
              worst_zz <= 1e-12;
  report(2, "Gamma0 = 8E, gain-one-derivative, z-definition, Re<z,z>", pass,
         fmt("(gamma %.2e, gain %.2e, ", worst_gamma, worst_gain) +
             fmt("z %.2e, zz %.2e)", worst_z, worst_zz));
}

// --- criterion 3: energy monotonicity over 5 seeded long runs ---

void criterion_3() {
  GridSpec g = make_grid(1, 256, default_length());
  const double eps = 0.1;
  const double kappas[5] = {0.05, 0.1, 0.316, 0.05, 0.1};
  double worst = -1.0;
  bool pass = true;
  for (int run = 0; run < 5; ++run) {
    PerturbationParams p = make_params(eps, kappas[run], 2, 1);
    auto [a0, phi0] =
        seeded_data(g, p, 100 + run, 0.9 * small_data_threshold(p));
    SolverConfig cfg{eps * eps / 4.0, 10.0 / eps, Method::strang_exact, true,
                     400};
    Trajectory traj = integrate(build_psi(a0, phi0, p), cfg, p);
    pass = pass && !traj.truncated();
    for (std::size_t i = 1; i < traj.diagnostics.size(); ++i) {
      double e0 = traj.diagnostics[i - 1].energy;
      double e1 = traj.diagnostics[i].energy;
      if (e0 > 0.0) worst = std::max(worst, (e1 - e0) / e0);
      pass = pass && e1 <= e0 * (1.0 + 1e-8);
    }
  }
  report(3, "E_eps non-increasing along 5 seeded runs, T = 10/eps", pass,
         fmt("(worst per-step dE/E = %.2e <= 1e-8)", worst));
}

// --- criterion 4: non-vanishing under the small-data threshold ---

void criterion_4() {
  GridSpec g = make_grid(1, 256, default_length());
  const double eps = 0.1;
  bool pass = true;
  double worst_dev = 0.0;
  for (double kappa : {eps, std::sqrt(eps)}) {
    PerturbationParams p = make_params(eps, kappa, 2, 1);
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
      auto [a0, phi0] =
          seeded_data(g, p, 200 + seed, 0.99 * small_data_threshold(p));
      SolverConfig cfg{eps * eps / 4.0, 10.0 / eps, Method::strang_exact,
                       true, 400};
      Trajectory traj = integrate(build_psi(a0, phi0, p), cfg, p);
      pass = pass && !traj.truncated();
      for (const auto& d : traj.diagnostics) {
        worst_dev = std::max(worst_dev, d.sup_mod2_dev);
        pass = pass && d.sup_mod2_dev < 0.5;
      }
    }
  }
  report(4, "|| |psi|^2 - 1 ||_inf < 1/2 for all small-data runs", pass,
         fmt("(worst deviation %.3f < 0.5, 10 runs)", worst_dev));
}

// --- criterion 5: cross-solver oracle at T = 1 ---

void criterion_5() {
  GridSpec g = make_grid(1, 256, default_length());
  PerturbationParams p = make_params(0.1, 0.1, 2, 1);
  auto [a0, phi0] = seeded_data(g, p, 300, 0.09);
  Field psi0 = build_psi(a0, phi0, p);
  HydroState h0 = extract_hydro(psi0, p, 0.0);
  const double dt = p.eps * p.eps / 8.0;
  SolverConfig pc{dt, 1.0, Method::rk4_reference, true, 1 << 20};
  SolverConfig bc{dt, 1.0, Method::bv_direct, true, 1 << 20};
  Trajectory ptraj = integrate(psi0, pc, p);
  BvTrajectory btraj = integrate_bv(h0.b, h0.v, bc, p);
  HydroState hT = extract_hydro(ptraj.snapshots.back().psi, p, 1.0);
  double rel = pair_sobolev_norm(hT.b - btraj.snapshots.back().b,
                                 hT.v - btraj.snapshots.back().v, p.s) /
               pair_sobolev_norm(hT.b, hT.v, p.s);
  report(5, "psi-solver extraction vs direct (b,v) integrator at T=1",
         rel <= 1e-6, fmt("(relative H^s distance %.2e <= 1e-6)", rel));
}

// --- criterion 6: convergence orders ---

void criterion_6() {
  GridSpec g = make_grid(1, 256, default_length());
  PerturbationParams p = make_params(0.1, 0.1, 2, 1);
  auto [a0, phi0] = seeded_data(g, p, 400, 0.09);
  Field psi0 = build_psi(a0, phi0, p);

  // Strang self-convergence order from a Richardson triple
  const double T = 0.04;
  auto advance = [&](double dt) {
    Field psi = to_spectral(psi0);
    long n = std::lround(T / dt);
    for (long i = 0; i < n; ++i) strang_step_inplace(psi, dt, p, true);
    return psi;
  };
  double base = p.eps * p.eps / 8.0;
  Field u1 = advance(base), u2 = advance(base / 2), u4 = advance(base / 4);
  double e12 = sobolev_norm(to_physical(u1 - u2), p.s);
  double e24 = sobolev_norm(to_physical(u2 - u4), p.s);
  double order = std::log2(e12 / e24);

  // residual stride halving on an rk4 trajectory recorded every step
  const double dt = p.eps * p.eps / 64.0;
  SolverConfig c1{dt, 48 * dt, Method::rk4_reference, true, 1};
  SolverConfig c2{dt, 48 * dt, Method::rk4_reference, true, 2};
  Trajectory t1 = integrate(psi0, c1, p);
  Trajectory t2 = integrate(psi0, c2, p);
  auto rz1 = residual_bz(t1, p);
  auto rz2 = residual_bz(t2, p);
  auto rv1 = residual_bv_reformulated(t1, p);
  auto rv2 = residual_bv_reformulated(t2, p);
  std::size_t j = rz2.size() / 2;
  double factor_bz = rz2[j].combined / rz1[2 * j + 1].combined;
  double factor_bv = rv2[j].combined / rv1[2 * j + 1].combined;

  bool pass = order >= 1.9 && factor_bz >= 3.5 && factor_bv >= 3.5;
  report(6, "Strang order >= 1.9; residual stride factors >= 3.5", pass,
         fmt("(order %.2f, ", order) +
             fmt("bz %.2f, bv %.2f)", factor_bz, factor_bv));
}

// --- criterion 7: comparison envelopes ---

double fitted_envelope_constant(const ComparisonResult& r,
                                const PerturbationParams& p) {
  double nu = p.nu();
  double bracket =
      std::max(1.0, 1.0 / nu) * r.M0 * r.M0 + (1.0 / nu) * r.M0;
  double c = 0.0;
  for (std::size_t i = 1; i < r.times.size(); ++i)
    c = std::max(c, r.errors[0][i] /
                        (std::sqrt(p.eps * p.kappa * r.times[i]) * bracket));
  return c;
}

void criterion_7() {
  GridSpec g = make_grid(1, 256, default_length());
  const double M0 = 0.09;

  // slope of e_{s-2}(t) over the final third of the early window
  PerturbationParams base = make_params(0.1, 0.1, 2, 1);
  auto [a0, phi0] = seeded_data(g, base, 500, M0);
  ComparisonResult r0 =
      run_comparison(a0, phi0, base, LinearModel::parabolic, 2.0, 30);
  std::vector<double> ft(r0.times.end() - r0.times.size() / 3, r0.times.end());
  std::vector<double> fe(r0.errors[0].end() - r0.errors[0].size() / 3,
                         r0.errors[0].end());
  ScalingFit fit = fit_loglog(ft, fe, "t");

  // constant stability across the eps-halving sweep with kappa = eps
  std::vector<double> constants;
  for (double eps : {0.1, 0.05, 0.025}) {
    PerturbationParams p = make_params(eps, eps, 2, 1);
    auto [a, ph] = seeded_data(g, p, 500, M0);
    ComparisonResult r =
        run_comparison(a, ph, p, LinearModel::parabolic, 2.0, 30);
    constants.push_back(fitted_envelope_constant(r, p));
  }
  double cmax = *std::max_element(constants.begin(), constants.end());
  double cmin = *std::min_element(constants.begin(), constants.end());

  // kappa ordering at eps = 0.1: kappa = eps gives the smallest normalized
  // constant among {eps, eps^{3/4}, sqrt(eps)}
  std::vector<double> ordering;
  for (double kappa : {0.1, std::pow(0.1, 0.75), std::sqrt(0.1)}) {
    PerturbationParams p = make_params(0.1, kappa, 2, 1);
    auto [a, ph] = seeded_data(g, p, 500, M0);
    ComparisonResult r =
        run_comparison(a, ph, p, LinearModel::parabolic, 2.0, 30);
    ordering.push_back(fitted_envelope_constant(r, p));
  }
  bool kappa_eq_eps_smallest =
      ordering[0] <= ordering[1] && ordering[0] <= ordering[2];

  bool pass = !fit.inconclusive && fit.slope <= 0.7 && cmax <= 2.0 * cmin &&
              kappa_eq_eps_smallest;
  report(7, "comparison envelope: slope, constant stability, kappa ordering",
         pass,
         fmt("(slope %.2f <= 0.7, stability %.2fx <= 2x, ", fit.slope,
             cmax / cmin) +
             fmt("C(k=eps)=%.4f smallest of (%.4f, ", ordering[0],
                 ordering[1]) +
             fmt("%.4f))", ordering[2]));
}

// --- criterion 8: semigroup bound certification ---

void criterion_8() {
  PerturbationParams p = make_params(0.1, 0.1, 2, 1);
  BoundReport r64 =
      verify_semigroup_bounds(p, standard_xi_grid(64), standard_t_grid(p));
  BoundReport r256 =
      verify_semigroup_bounds(p, standard_xi_grid(256), standard_t_grid(p));
  bool finite = r64.low.feasible && r64.high.feasible && r256.low.feasible &&
                r256.high.feasible;
  bool stable = r256.low.C <= 2.0 * r64.low.C &&
                r64.low.C <= 2.0 * r256.low.C &&
                r256.high.C <= 2.0 * r64.high.C &&
                r64.high.C <= 2.0 * r256.high.C;
  report(8, "finite fitted (C, c) stable under 64 -> 256 refinement",
         finite && stable,
         fmt("(low C %.3f -> %.3f, ", r64.low.C, r256.low.C) +
             fmt("high C %.3f -> %.3f)", r64.high.C, r256.high.C));
}

// --- criterion 9: mutation discrimination ---

void criterion_9() {
  GridSpec g = make_grid(1, 256, default_length());
  PerturbationParams p = make_params(0.1, 0.1, 2, 1);
  auto [a0, phi0] = seeded_data(g, p, 600, 0.09);
  const double dt = p.eps * p.eps / 128.0;
  SolverConfig cfg{dt, 24 * dt, Method::rk4_reference, true, 1};
  Trajectory traj = integrate(build_psi(a0, phi0, p), cfg, p);

  auto bz = residual_bz(traj, p);
  auto bz_mut = residual_bz(traj, p, ResidualMutation::flip_grad_zz);
  auto bv = residual_bv_reformulated(traj, p);
  auto bv_mut =
      residual_bv_reformulated(traj, p, ResidualMutation::flip_div_b_rez);
  std::size_t mid = bz.size() / 2;
  double ratio_bz = bz_mut[mid].combined / bz[mid].combined;
  double ratio_bv = bv_mut[mid].combined / bv[mid].combined;
  report(9, "residual suites degrade >= 100x under a single sign flip",
         ratio_bz >= 100.0 && ratio_bv >= 100.0,
         fmt("(bz %.0fx, bv %.0fx)", ratio_bz, ratio_bv));
}

// --- criterion 10: bit-identical CSV artifacts ---

void criterion_10() {
  namespace fs = std::filesystem;
  fs::path tmp = fs::temp_directory_path() / "cglwave_acceptance_det";
  fs::remove_all(tmp);
  auto run_into = [&](const std::string& sub) {
    RunConfig rc = parse_config(
        "experiment = compare\ncompare.samples = 6\ncompare.t_end_slow = "
        "0.5\ninit.seed = 3\ninit.target_m0 = 0.05\noutput.dir = " +
        (tmp / sub).string() + "\n");
    RunResult res = run(rc, true);
    std::map<std::string, std::string> csvs;
    for (const auto& a : res.artifacts) {
      if (a.kind != "csv") continue;
      std::ifstream in(a.path, std::ios::binary);
      std::stringstream ss;
      ss << in.rdbuf();
      csvs[fs::path(a.path).filename().string()] = ss.str();
    }
    return csvs;
  };
  auto a = run_into("a");
  auto b = run_into("b");
  bool pass = !a.empty() && a.size() == b.size();
  if (pass)
    for (const auto& [name, text] : a)
      pass = pass && b.count(name) == 1 && b.at(name) == text;
  fs::remove_all(tmp);
  report(10, "repeated runs produce bit-identical CSVs", pass,
         "(" + std::to_string(a.size()) + " artifacts compared)");
}

// --- 2-d smoke subset: the identity suite and a short monotone run ---

void smoke_2d() {
  GridSpec g = make_grid(2, 64, default_length());
  PerturbationParams p = make_params(0.1, 0.1, 3, 2);
  Field a0 = band_limited_random(g, 6, 1.0, p.s, 900);
  Field phi0 = band_limited_random(g, 6, 1.0, p.s, 901);
  double m0 = compute_M0(a0, phi0, p);
  a0 = a0 * (0.09 / m0);
  phi0 = phi0 * (0.09 / m0);
  Field psi = build_psi(a0, phi0, p);
  HydroState h = extract_hydro(psi, p, 0.0);
  double gamma0 = gamma_seminorm(h.b, h.z, 0, p);
  double e8 = 8.0 * gl_energy(psi, p);
  bool identities = std::abs(gamma0 - e8) / e8 <= 1e-10 &&
                    z_identity_residual(h) <= 1e-8;

  SolverConfig cfg{p.eps * p.eps / 4.0, 0.25, Method::strang_exact, true, 20};
  Trajectory traj = integrate(psi, cfg, p);
  bool monotone = !traj.truncated();
  for (std::size_t i = 1; i < traj.diagnostics.size(); ++i)
    monotone = monotone && traj.diagnostics[i].energy <=
                               traj.diagnostics[i - 1].energy * (1.0 + 1e-8);
  report(11, "2-d smoke subset (identities + energy monotonicity at 64^2)",
         identities && monotone,
         fmt("(gamma rel %.2e, ", std::abs(gamma0 - e8) / e8) +
             (monotone ? "run monotone)" : "run NOT monotone)"));
}

}  // namespace

int main() {
  criterion_1();
  criterion_2();
  criterion_3();
  criterion_4();
  criterion_5();
  criterion_6();
  criterion_7();
  criterion_8();
  criterion_9();
  criterion_10();
  smoke_2d();
  if (g_failures == 0)
    std::printf("acceptance: all criteria passed\n");
  else
    std::printf("acceptance: %d criterion(s) FAILED\n", g_failures);
  return g_failures == 0 ? 0 : 1;
}
