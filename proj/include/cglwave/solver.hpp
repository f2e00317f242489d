#pragma once

#include <cassert>
#include <cmath>
#include <cstdint>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "cglwave/hydro.hpp"
#include "cglwave/propagators.hpp"

namespace cglwave {

// Time integration of the parabolic-frame equation
//   dt psi = (kappa + i) [ Lap psi + eps^{-2} psi (1 - |psi|^2) ].
// strang_exact splits off the reaction term and solves it pointwise in closed
// form, which removes the eps^{-2} stiffness; rk4_reference is the classical
// scheme on the full right-hand side and needs the advertised dt bound.

enum class Method { strang_exact, rk4_reference, bv_direct };

struct SolverConfig {
  double dt = 0.0;
  double t_end = 0.0;
  Method method = Method::strang_exact;
  bool dealias = true;
  int record_stride = 1;
};

inline double rk4_stability_dt(const GridSpec& g, const PerturbationParams& p) {
  const double xi_max = g.xi_max_abs();
  return 0.5 * std::min(p.eps * p.eps / p.kappa,
                        1.0 / (p.kappa * xi_max * xi_max));
}

inline double default_dt(Method m, const GridSpec& g,
                         const PerturbationParams& p) {
  const double xi_max = g.xi_max_abs();
  if (m == Method::strang_exact) return p.eps * p.eps / 4.0;
  return std::min(0.1 * p.eps * p.eps, 0.5 / (p.kappa * xi_max * xi_max));
}

inline void validate_solver_config(const SolverConfig& cfg, const GridSpec& g,
                                   const PerturbationParams& p) {
  if (!(cfg.dt > 0.0)) throw config_error("solver.dt must be positive");
  if (cfg.dt > cfg.t_end) throw config_error("solver.dt must be <= t_end");
  if (cfg.record_stride < 1)
    throw config_error("solver.record_stride must be >= 1");
  if (cfg.method == Method::rk4_reference && cfg.dt > rk4_stability_dt(g, p))
    throw config_error(
        "solver.dt exceeds the rk4 stability bound 0.5*min(eps^2/kappa, "
        "1/(kappa*xi_max^2)) = " + std::to_string(rk4_stability_dt(g, p)));
}

// exact flow of the diffusion part: mode factor exp(-(kappa+i)|xi|^2 dt)
inline void linear_substep_inplace(Field& psi_hat, double dt,
                                   const PerturbationParams& p) {
  assert(psi_hat.rep() == Rep::spectral);
  const GridSpec& g = psi_hat.grid();
  const cplx coeff(p.kappa, 1.0);
  for (std::size_t i = 0; i < psi_hat.size(); ++i)
    psi_hat[i] *= std::exp(-coeff * g.xi_squared(i) * dt);
}

inline Field linear_substep(Field psi_hat, double dt,
                            const PerturbationParams& p) {
  linear_substep_inplace(psi_hat, dt, p);
  return psi_hat;
}

// Exact pointwise flow of dt psi = (kappa+i) eps^{-2} psi (1-|psi|^2):
// with m = |psi|^2, m(dt) = m0 / (m0 + (1-m0) e^{-2 kappa dt/eps^2}) is the
// logistic solution and the phase advances by ln(m(dt)/m0) / (2 kappa).
inline void nonlinear_substep_inplace(Field& psi, double dt,
                                      const PerturbationParams& p) {
  assert(psi.rep() == Rep::physical);
  const double decay = std::exp(-2.0 * p.kappa * dt / (p.eps * p.eps));
  const double inv_2kappa = 1.0 / (2.0 * p.kappa);
  for (auto& x : psi.values()) {
    const double m0 = std::norm(x);
    assert(m0 > 0.0);
    const double denom = m0 + (1.0 - m0) * decay;
    assert(denom > 0.0);  // holds for every m0 > 0 and dt >= 0
    // m(dt)/m0 = 1/denom
    const double ratio = 1.0 / denom;
    x *= std::sqrt(ratio) * std::polar(1.0, inv_2kappa * std::log(ratio));
  }
}

inline Field nonlinear_substep_exact(Field psi, double dt,
                                     const PerturbationParams& p) {
  nonlinear_substep_inplace(psi, dt, p);
  return psi;
}

// linear(dt/2) o nonlinear(dt) o linear(dt/2); dealiasing right after the
// physical-space nonlinear work
inline void strang_step_inplace(Field& psi_hat, double dt,
                                const PerturbationParams& p,
                                bool dealias = true) {
  linear_substep_inplace(psi_hat, 0.5 * dt, p);
  psi_hat.transform_inplace(Direction::inverse);
  nonlinear_substep_inplace(psi_hat, dt, p);
  psi_hat.transform_inplace(Direction::forward);
  if (dealias) dealias_inplace(psi_hat);
  linear_substep_inplace(psi_hat, 0.5 * dt, p);
}

inline Field strang_step(Field psi, double dt, const PerturbationParams& p,
                         bool dealias = true) {
  Field out = to_spectral(psi);
  strang_step_inplace(out, dt, p, dealias);
  return out;
}

namespace detail {

inline Field cgl_rhs(const Field& psi_hat, const PerturbationParams& p,
                     bool dealias) {
  const GridSpec& g = psi_hat.grid();
  Field pp = to_physical(psi_hat);
  Field nl(g, Rep::physical, false);
  const cplx coeff = cplx(p.kappa, 1.0) / (p.eps * p.eps);
  for (std::size_t i = 0; i < pp.size(); ++i)
    nl[i] = coeff * pp[i] * (1.0 - std::norm(pp[i]));
  nl.transform_inplace(Direction::forward);
  if (dealias) dealias_inplace(nl);
  const cplx lin(p.kappa, 1.0);
  for (std::size_t i = 0; i < nl.size(); ++i)
    nl[i] -= lin * g.xi_squared(i) * psi_hat[i];
  return nl;
}

}  // namespace detail

inline void rk4_step_inplace(Field& psi_hat, double dt,
                             const PerturbationParams& p, bool dealias = true) {
  Field k1 = detail::cgl_rhs(psi_hat, p, dealias);
  Field u2 = psi_hat;
  for (std::size_t i = 0; i < u2.size(); ++i) u2[i] += 0.5 * dt * k1[i];
  Field k2 = detail::cgl_rhs(u2, p, dealias);
  Field u3 = psi_hat;
  for (std::size_t i = 0; i < u3.size(); ++i) u3[i] += 0.5 * dt * k2[i];
  Field k3 = detail::cgl_rhs(u3, p, dealias);
  Field u4 = psi_hat;
  for (std::size_t i = 0; i < u4.size(); ++i) u4[i] += dt * k3[i];
  Field k4 = detail::cgl_rhs(u4, p, dealias);
  for (std::size_t i = 0; i < psi_hat.size(); ++i)
    psi_hat[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
}

enum class AbortReason { none, regime_violation, vanishing_risk, instability };

struct StepDiagnostics {
  double time = 0.0;
  double energy = 0.0;
  double min_abs_psi = 0.0;
  double sup_mod2_dev = 0.0;  // || |psi|^2 - 1 ||_inf
};

struct PsiSnapshot {
  double time = 0.0;
  Field psi;  // spectral
};

struct Trajectory {
  GridSpec grid;
  PerturbationParams params;
  SolverConfig config;
  std::uint64_t seed = 0;
  std::vector<PsiSnapshot> snapshots;
  std::vector<StepDiagnostics> diagnostics;  // one entry per step
  AbortReason abort = AbortReason::none;
  std::string abort_detail;
  bool truncated() const { return abort != AbortReason::none; }
};

namespace detail {

inline StepDiagnostics psi_diagnostics(const Field& psi_hat, double t,
                                       const PerturbationParams& p) {
  const GridSpec& g = psi_hat.grid();
  double grad2 = 0.0;
  for (std::size_t i = 0; i < psi_hat.size(); ++i)
    grad2 += g.xi_squared(i) * std::norm(psi_hat[i]);
  double vol = g.dim == 1 ? g.length : g.length * g.length;
  grad2 *= vol;  // Parseval form of int |grad psi|^2

  Field pp = to_physical(psi_hat);
  double quart = 0.0, min_abs2 = std::numeric_limits<double>::infinity(),
         sup_dev = 0.0;
  for (const auto& x : pp.values()) {
    double m = std::norm(x);
    double dev = 1.0 - m;
    quart += dev * dev;
    min_abs2 = std::min(min_abs2, m);
    sup_dev = std::max(sup_dev, std::abs(dev));
  }
  quart *= g.cell_volume() / (4.0 * p.eps * p.eps);
  return StepDiagnostics{t, 0.5 * grad2 + quart, std::sqrt(min_abs2), sup_dev};
}

}  // namespace detail

using ProgressCallback =
    std::function<void(double t, double energy, double min_abs_psi)>;

// Runs the configured stepper, recording per-step diagnostics and snapshots
// every record_stride steps. Aborts (returning a truncated trajectory) when
// || |psi|^2 - 1 ||_inf reaches 1/2 or when the run turns unstable. t_end is
// rounded up to a whole number of recording strides.
inline Trajectory integrate(const Field& psi0, const SolverConfig& cfg,
                            const PerturbationParams& p,
                            const ProgressCallback& progress = nullptr) {
  validate_solver_config(cfg, psi0.grid(), p);
  if (cfg.method == Method::bv_direct)
    throw config_error("integrate: use integrate_bv for the bv_direct method");

  Trajectory traj;
  traj.grid = psi0.grid();
  traj.params = p;
  traj.config = cfg;

  // whole number of uniform recording strides; t_end may grow by < stride*dt
  long n_steps = static_cast<long>(std::ceil(cfg.t_end / cfg.dt - 1e-9));
  const long stride = std::min<long>(cfg.record_stride, n_steps);
  long rem = n_steps % stride;
  if (rem != 0) n_steps += stride - rem;

  Field psi = to_spectral(psi0);
  StepDiagnostics d0 = detail::psi_diagnostics(psi, 0.0, p);
  traj.diagnostics.push_back(d0);
  traj.snapshots.push_back({0.0, psi});
  if (progress) progress(0.0, d0.energy, d0.min_abs_psi);
  const double initial_scale = std::max(1.0, d0.energy);
  if (d0.sup_mod2_dev >= 0.5) {
    traj.abort = AbortReason::regime_violation;
    traj.abort_detail = "initial || |psi|^2 - 1 ||_inf = " +
                        std::to_string(d0.sup_mod2_dev);
    return traj;
  }

  for (long k = 1; k <= n_steps; ++k) {
    if (cfg.method == Method::strang_exact)
      strang_step_inplace(psi, cfg.dt, p, cfg.dealias);
    else
      rk4_step_inplace(psi, cfg.dt, p, cfg.dealias);
    const double t = k * cfg.dt;

    StepDiagnostics d = detail::psi_diagnostics(psi, t, p);
    traj.diagnostics.push_back(d);

    if (!std::isfinite(d.energy) || d.energy > 1e6 * initial_scale) {
      traj.abort = AbortReason::instability;
      traj.abort_detail = "energy " + std::to_string(d.energy) + " at t = " +
                          std::to_string(t);
      traj.snapshots.push_back({t, psi});
      break;
    }
    if (d.sup_mod2_dev >= 0.5) {
      // the exact flow cannot raise E_eps, so leaving the regime with grown
      // energy is a numerical blow-up rather than a physical regime exit
      bool energy_grew = d.energy > d0.energy * (1.0 + 1e-6);
      traj.abort = energy_grew ? AbortReason::instability
                               : AbortReason::regime_violation;
      traj.abort_detail = "|| |psi|^2 - 1 ||_inf = " +
                          std::to_string(d.sup_mod2_dev) + " at t = " +
                          std::to_string(t) +
                          (energy_grew ? " with increased energy" : "");
      traj.snapshots.push_back({t, psi});
      break;
    }
    if (k % stride == 0) {
      traj.snapshots.push_back({t, psi});
      if (progress) progress(t, d.energy, d.min_abs_psi);
    }
  }
  return traj;
}

// ---- right-hand side of the (b, v) system, in its original variables ----

struct BvRhs {
  Field db;
  VectorField dv;
};

// Full right-hand side of
//   dt b = -(sqrt2/eps) div v - (2 nu/eps) b + kappa Lap b + ftilde(b, v)
//   dt v = -(sqrt2/eps) grad b + kappa Lap v + gtilde(b, v)
// with ftilde = sqrt2 nu (-2|grad rho|^2 - rho^2 |v|^2/2 - b^2) - div(b v)
// and  gtilde = kappa grad((grad rho^2 / rho^2) . v) + 2 grad(Lap rho / rho)
//               - v . grad v,     rho = sqrt(1 + (eps/sqrt2) b).
inline BvRhs bv_rhs(const HydroState& h, const PerturbationParams& p) {
  const GridSpec& g = h.b.grid();
  const double s2 = std::numbers::sqrt2;
  const double nu = p.nu();

  Field b = to_physical(h.b);
  std::vector<Field> v;
  for (const auto& c : h.v.comp) v.push_back(to_physical(c));

  Field rho_sq(g, Rep::physical, true);
  Field rho(g, Rep::physical, true);
  for (std::size_t i = 0; i < b.size(); ++i) {
    double r2 = 1.0 + p.eps / s2 * b[i].real();
    if (!(r2 > 0.0))
      throw regime_violation("bv_rhs: weight 1 + (eps/sqrt2) b nonpositive",
                             h.time);
    rho_sq[i] = r2;
    rho[i] = std::sqrt(r2);
  }

  // ftilde
  Field grad_rho_sq_mag = dk_square(rho, 1);
  Field ft(g, Rep::physical, true);
  for (std::size_t i = 0; i < ft.size(); ++i) {
    double v2 = 0.0;
    for (const auto& c : v) v2 += std::norm(c[i]);
    ft[i] = s2 * nu *
            (-2.0 * grad_rho_sq_mag[i].real() -
             rho_sq[i].real() * v2 / 2.0 - b[i].real() * b[i].real());
  }
  VectorField bv = VectorField::zero(g, Rep::physical, true);
  for (int a = 0; a < g.dim; ++a)
    bv.comp[a] = pointwise_multiply(b, v[a]);
  ft -= to_physical(divergence(bv));
  Field ft_hat = to_spectral(ft);
  dealias_inplace(ft_hat);

  // gtilde
  Field lap_rho = to_physical(laplacian(rho));
  Field lap_rho_over_rho(g, Rep::physical, true);
  for (std::size_t i = 0; i < g.total(); ++i)
    lap_rho_over_rho[i] = lap_rho[i].real() / rho[i].real();
  VectorField grad_lrr = gradient(lap_rho_over_rho);

  VectorField grad_rho_sq = gradient(rho_sq);
  Field dot(g, Rep::physical, true);
  for (std::size_t i = 0; i < g.total(); ++i) {
    cplx acc = 0.0;
    for (int a = 0; a < g.dim; ++a)
      acc += to_physical(grad_rho_sq.comp[a])[i].real() /
             rho_sq[i].real() * v[a][i].real();
    dot[i] = acc;
  }
  VectorField grad_dot = gradient(dot);

  std::vector<VectorField> grad_v;
  for (int a = 0; a < g.dim; ++a) grad_v.push_back(gradient(v[a]));

  std::vector<Field> gt_hat;
  for (int a = 0; a < g.dim; ++a) {
    Field adv(g, Rep::physical, true);
    for (std::size_t i = 0; i < g.total(); ++i) {
      cplx acc = 0.0;
      for (int j = 0; j < g.dim; ++j)
        acc += v[j][i].real() * to_physical(grad_v[a].comp[j])[i].real();
      adv[i] = acc;
    }
    Field gt = to_physical(grad_dot.comp[a]) * p.kappa +
               to_physical(grad_lrr.comp[a]) * 2.0 - adv;
    Field gh = to_spectral(gt);
    dealias_inplace(gh);
    gt_hat.push_back(std::move(gh));
  }

  // assemble with the linear terms (kept undealiased)
  Field db_hat = to_spectral(divergence(h.v)) * (-s2 / p.eps);
  Field b_hat = to_spectral(h.b);
  const double damp = 2.0 * nu / p.eps;
  for (std::size_t i = 0; i < db_hat.size(); ++i)
    db_hat[i] += (-damp - p.kappa * g.xi_squared(i)) * b_hat[i] + ft_hat[i];

  BvRhs out;
  Field dbp = to_physical(db_hat);
  detail::zero_imag(dbp);
  out.db = std::move(dbp);
  VectorField grad_b = gradient(h.b);
  out.dv = VectorField::zero(g, Rep::physical, true);
  for (int a = 0; a < g.dim; ++a) {
    Field dv_hat = to_spectral(h.v.comp[a]);
    Field gb = grad_b.comp[a];
    for (std::size_t i = 0; i < dv_hat.size(); ++i)
      dv_hat[i] = -s2 / p.eps * gb[i] -
                  p.kappa * g.xi_squared(i) * dv_hat[i] + gt_hat[a][i];
    Field dvp = to_physical(dv_hat);
    detail::zero_imag(dvp);
    out.dv.comp[a] = std::move(dvp);
  }
  return out;
}

// ---- direct (b, v) integrator: Lawson-RK4 on the symmetrized variables ----

struct BvSnapshot {
  double time = 0.0;
  Field b;
  VectorField v;
};

struct BvTrajectory {
  GridSpec grid;
  PerturbationParams params;
  SolverConfig config;
  std::vector<BvSnapshot> snapshots;
  AbortReason abort = AbortReason::none;
  std::string abort_detail;
  bool truncated() const { return abort != AbortReason::none; }
};

namespace detail {

struct CdState {
  Field c;
  Field d;
};

inline CdState axpy(const CdState& x, double a, const CdState& y) {
  CdState out = x;
  for (std::size_t i = 0; i < out.c.size(); ++i) {
    out.c[i] += a * y.c[i];
    out.d[i] += a * y.d[i];
  }
  return out;
}

inline void apply_mode_matrices(const std::vector<Mat2>& ms, CdState& s) {
  for (std::size_t i = 0; i < s.c.size(); ++i) apply(ms[i], s.c[i], s.d[i]);
}

// quadratic forcing (F, G) of the symmetrized system, evaluated from (c, d):
//   f(b,z) = nu(-(1/sqrt2)(1+(eps/sqrt2)b)|z|^2 - sqrt2 b^2) - div(b Re z)
//   g(b,z) = -kappa grad(Re z . Im z) + (eps/sqrt2) grad div(b Im z)
//            - (1/2) grad Re<z, z>
//   F = (1 - eps^2/2 Lap)^{1/2} f,   G = (-Lap)^{-1/2} div g
inline CdState cd_forcing(const CdState& s, const PerturbationParams& p,
                          bool dealias, double t) {
  const GridSpec& g = s.c.grid();
  const double s2 = std::numbers::sqrt2;
  const double nu = p.nu();

  Field b_hat = s.c;
  for (std::size_t i = 0; i < b_hat.size(); ++i)
    b_hat[i] /= symmetrizer_multiplier(p.eps, g.xi_squared(i));
  Field b = to_physical(b_hat);
  zero_imag(b);

  VectorField v_spec = vector_from_d(s.d);
  std::vector<Field> v;
  for (auto& c : v_spec.comp) {
    Field pc = to_physical(c);
    zero_imag(pc);
    v.push_back(std::move(pc));
  }

  Field rho_sq(g, Rep::physical, true);
  for (std::size_t i = 0; i < b.size(); ++i) {
    double r2 = 1.0 + p.eps / s2 * b[i].real();
    if (!(r2 > 0.0))
      throw regime_violation("integrate_bv: 1 + (eps/sqrt2) b nonpositive", t);
    rho_sq[i] = r2;
  }
  VectorField glog = grad_log_field(rho_sq);  // Im z = -glog

  // f
  Field f(g, Rep::physical, true);
  for (std::size_t i = 0; i < f.size(); ++i) {
    double z2 = 0.0;
    for (int a = 0; a < g.dim; ++a)
      z2 += std::norm(v[a][i]) + std::norm(glog.comp[a][i]);
    f[i] = nu * (-(1.0 / s2) * rho_sq[i].real() * z2 -
                 s2 * b[i].real() * b[i].real());
  }
  VectorField b_rez = VectorField::zero(g, Rep::physical, true);
  for (int a = 0; a < g.dim; ++a) b_rez.comp[a] = pointwise_multiply(b, v[a]);
  f -= to_physical(divergence(b_rez));
  Field f_hat = to_spectral(f);
  if (dealias) dealias_inplace(f_hat);

  // g = kappa grad(v . glog) - (eps/sqrt2) grad div(b glog)
  //     - (1/2) grad(|v|^2 - |glog|^2)
  Field re_im(g, Rep::physical, true);   // Re z . Im z = -v . glog
  Field re_zz(g, Rep::physical, true);   // Re<z,z> = |v|^2 - |glog|^2
  for (std::size_t i = 0; i < g.total(); ++i) {
    double dot = 0.0, v2 = 0.0, g2 = 0.0;
    for (int a = 0; a < g.dim; ++a) {
      dot += v[a][i].real() * glog.comp[a][i].real();
      v2 += std::norm(v[a][i]);
      g2 += std::norm(glog.comp[a][i]);
    }
    re_im[i] = -dot;
    re_zz[i] = v2 - g2;
  }
  VectorField b_imz = VectorField::zero(g, Rep::physical, true);
  for (int a = 0; a < g.dim; ++a) {
    for (std::size_t i = 0; i < g.total(); ++i)
      b_imz.comp[a][i] = -b[i].real() * glog.comp[a][i].real();
  }
  Field scalar = re_im * (-p.kappa) - re_zz * 0.5;
  Field div_bimz = to_physical(divergence(b_imz));
  for (std::size_t i = 0; i < g.total(); ++i)
    scalar[i] += p.eps / s2 * div_bimz[i].real();
  VectorField gvec = gradient(scalar);
  for (auto& c : gvec.comp) {
    if (c.rep() != Rep::spectral) c = to_spectral(c);
    if (dealias) dealias_inplace(c);
  }

  CdState out{f_hat, d_from_vector(gvec)};
  for (std::size_t i = 0; i < out.c.size(); ++i)
    out.c[i] *= symmetrizer_multiplier(p.eps, g.xi_squared(i));
  return out;
}

inline BvSnapshot cd_to_bv(const CdState& s, const PerturbationParams& p,
                           double t) {
  SymmetrizedState sym;
  sym.time = t;
  sym.c = s.c;
  sym.d = s.d;
  auto [b, v] = desymmetrize(sym, p);
  return BvSnapshot{t, std::move(b), std::move(v)};
}

}  // namespace detail

// Integrating-factor RK4 on the symmetrized system: the stiff linear part is
// advanced exactly through per-mode matrix exponentials of M(xi); only the
// quadratic forcing is treated explicitly.
inline BvTrajectory integrate_bv(const Field& b0, const VectorField& v0,
                                 const SolverConfig& cfg,
                                 const PerturbationParams& p) {
  if (!(cfg.dt > 0.0)) throw config_error("solver.dt must be positive");
  if (cfg.dt > cfg.t_end) throw config_error("solver.dt must be <= t_end");
  if (cfg.record_stride < 1)
    throw config_error("solver.record_stride must be >= 1");

  const GridSpec& g = b0.grid();
  BvTrajectory traj;
  traj.grid = g;
  traj.params = p;
  traj.config = cfg;

  long n_steps = static_cast<long>(std::ceil(cfg.t_end / cfg.dt - 1e-9));
  const long stride = std::min<long>(cfg.record_stride, n_steps);
  long rem = n_steps % stride;
  if (rem != 0) n_steps += stride - rem;

  std::vector<Mat2> e_half(g.total()), e_full(g.total());
  for (std::size_t i = 0; i < g.total(); ++i) {
    TwoByTwoFlow flow = mode_matrix_cd(g.xi_abs(i), p);
    e_half[i] = semigroup_closed_form(flow, 0.5 * cfg.dt);
    e_full[i] = semigroup_closed_form(flow, cfg.dt);
  }

  SymmetrizedState s0 = symmetrize_pair(b0, v0, p, 0.0);
  detail::CdState u{to_spectral(s0.c), to_spectral(s0.d)};
  traj.snapshots.push_back(detail::cd_to_bv(u, p, 0.0));

  const double h = cfg.dt;
  for (long k = 1; k <= n_steps; ++k) {
    const double t = (k - 1) * h;
    try {
      detail::CdState k1 = detail::cd_forcing(u, p, cfg.dealias, t);
      detail::CdState s2v = detail::axpy(u, 0.5 * h, k1);
      detail::apply_mode_matrices(e_half, s2v);
      detail::CdState k2 = detail::cd_forcing(s2v, p, cfg.dealias, t + 0.5 * h);
      detail::CdState uh = u;
      detail::apply_mode_matrices(e_half, uh);
      detail::CdState s3v = detail::axpy(uh, 0.5 * h, k2);
      detail::CdState k3 = detail::cd_forcing(s3v, p, cfg.dealias, t + 0.5 * h);
      detail::CdState uf = u;
      detail::apply_mode_matrices(e_full, uf);
      detail::CdState k3e = k3;
      detail::apply_mode_matrices(e_half, k3e);
      detail::CdState s4v = detail::axpy(uf, h, k3e);
      detail::CdState k4 = detail::cd_forcing(s4v, p, cfg.dealias, t + h);

      // u_{n+1} = E u + h/6 (E k1 + 2 E_half (k2 + k3) + k4)
      detail::CdState k1e = k1;
      detail::apply_mode_matrices(e_full, k1e);
      detail::CdState k23 = detail::axpy(k2, 1.0, k3);
      detail::apply_mode_matrices(e_half, k23);
      for (std::size_t i = 0; i < u.c.size(); ++i) {
        u.c[i] = uf.c[i] +
                 h / 6.0 * (k1e.c[i] + 2.0 * k23.c[i] + k4.c[i]);
        u.d[i] = uf.d[i] +
                 h / 6.0 * (k1e.d[i] + 2.0 * k23.d[i] + k4.d[i]);
      }
    } catch (const regime_violation& e) {
      traj.abort = AbortReason::regime_violation;
      traj.abort_detail = e.what();
      break;
    }

    double nrm = 0.0;
    for (std::size_t i = 0; i < u.c.size(); ++i)
      nrm = std::max({nrm, std::abs(u.c[i]), std::abs(u.d[i])});
    if (!std::isfinite(nrm) || nrm > 1e6) {
      traj.abort = AbortReason::instability;
      traj.abort_detail = "state norm " + std::to_string(nrm) + " at t = " +
                          std::to_string(k * h);
      break;
    }
    if (k % stride == 0)
      traj.snapshots.push_back(detail::cd_to_bv(u, p, k * h));
  }
  return traj;
}

}  // namespace cglwave
