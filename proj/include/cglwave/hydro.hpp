#pragma once

#include <cmath>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "cglwave/field.hpp"
#include "cglwave/norms.hpp"
#include "cglwave/params.hpp"

namespace cglwave {

// Hydrodynamic snapshot in the parabolic frame:
//   rho^2 = 1 + (eps/sqrt2) b,   v = 2 grad(phi),   z = v - i grad(ln rho^2).
// v is a mean-zero gradient field; rho^2 > 1/2 everywhere inside the regime.
struct HydroState {
  double time = 0.0;
  Field b;
  VectorField v;
  VectorField z;
  Field rho_sq;
};

// (c, d) view that makes the linear part of the (b,v) system a symmetric-plus-
// rotation 2x2 mode matrix:
//   c = (1 - eps^2/2 Lap)^{1/2} b,   d = (-Lap)^{-1/2} div v,   d_hat(0) = 0.
struct SymmetrizedState {
  double time = 0.0;
  Field c;
  Field d;
};

// Psi0 = (1 + (eps/sqrt2) a0)^{1/2} exp(i phi0), valid while the amplitude
// perturbation keeps the radicand positive.
inline Field build_psi(const Field& a0, const Field& phi0,
                       const PerturbationParams& p) {
  Field a = to_physical(a0);
  Field phi = to_physical(phi0);
  const double coeff = p.eps / std::numbers::sqrt2;
  if (coeff * linf_norm(a) >= 1.0)
    throw regime_violation(
        "build_psi: (eps/sqrt2)*||a0||_inf must be < 1 for the lifting");
  Field psi(a.grid(), Rep::physical, false);
  for (std::size_t i = 0; i < psi.size(); ++i) {
    double r = std::sqrt(1.0 + coeff * a[i].real());
    psi[i] = std::polar(r, phi[i].real());
  }
  return psi;
}

namespace detail {

inline VectorField grad_log_field(const Field& positive_physical) {
  // spectral gradient of ln(f) for a strictly positive physical field
  Field lf(positive_physical.grid(), Rep::physical, true);
  for (std::size_t i = 0; i < lf.size(); ++i)
    lf[i] = std::log(positive_physical[i].real());
  VectorField g = gradient(lf);
  VectorField out;
  for (auto& c : g.comp) {
    Field pc = to_physical(c);
    zero_imag(pc);
    out.comp.push_back(std::move(pc));
  }
  return out;
}

}  // namespace detail

// b = (sqrt2/eps)(|psi|^2 - 1), v = 2 Im(conj(psi) grad psi)/|psi|^2 projected
// onto its gradient part, z = v - i grad ln(rho^2).
inline HydroState extract_hydro(const Field& psi, const PerturbationParams& p,
                                double t) {
  Field pp = to_physical(psi);
  const GridSpec& g = pp.grid();

  Field m = abs_squared(pp);
  double min_m = m[0].real();
  std::size_t where = 0;
  for (std::size_t i = 0; i < m.size(); ++i) {
    if (m[i].real() < min_m) {
      min_m = m[i].real();
      where = i;
    }
  }
  if (!(min_m > 0.5))
    throw vanishing_risk("extract_hydro: min |psi|^2 = " + std::to_string(min_m) +
                             " <= 1/2, lifting unsafe",
                         std::sqrt(std::max(min_m, 0.0)), where, t);

  HydroState h;
  h.time = t;
  h.rho_sq = m;

  const double inv_coeff = std::numbers::sqrt2 / p.eps;
  h.b = Field(g, Rep::physical, true);
  for (std::size_t i = 0; i < m.size(); ++i)
    h.b[i] = inv_coeff * (m[i].real() - 1.0);

  VectorField grad_psi = gradient(pp);
  VectorField v_raw = VectorField::zero(g, Rep::physical, true);
  for (int a = 0; a < g.dim; ++a) {
    Field gp = to_physical(grad_psi.comp[a]);
    for (std::size_t i = 0; i < gp.size(); ++i) {
      cplx prod = std::conj(pp[i]) * gp[i];
      v_raw.comp[a][i] = 2.0 * prod.imag() / m[i].real();
    }
  }
  VectorField v_spec = project_gradient(v_raw);
  h.v = VectorField::zero(g, Rep::physical, true);
  for (int a = 0; a < g.dim; ++a) {
    Field pc = to_physical(v_spec.comp[a]);
    detail::zero_imag(pc);
    h.v.comp[a] = std::move(pc);
  }

  VectorField gl = detail::grad_log_field(m);
  h.z = VectorField::zero(g, Rep::physical, false);
  for (int a = 0; a < g.dim; ++a)
    for (std::size_t i = 0; i < m.size(); ++i)
      h.z.comp[a][i] = h.v.comp[a][i].real() -
                       cplx(0.0, 1.0) * gl.comp[a][i].real();
  return h;
}

// inverse lifting, up to the global phase constant that b,v cannot see
inline Field reconstruct_psi(const HydroState& h, const PerturbationParams& p) {
  const GridSpec& g = h.b.grid();
  Field phi(g, Rep::spectral, true);
  VectorField v_spec;
  for (const auto& c : h.v.comp) v_spec.comp.push_back(to_spectral(c));
  for (std::size_t i = 0; i < phi.size(); ++i) {
    double xi2 = g.xi_squared(i);
    if (xi2 == 0.0) continue;
    cplx dot = 0.0;
    for (int a = 0; a < g.dim; ++a)
      dot += g.xi_component(i, a) * v_spec.comp[a][i];
    phi[i] = dot / cplx(0.0, 2.0 * xi2);
  }
  Field phi_p = to_physical(phi);
  const double coeff = p.eps / std::numbers::sqrt2;
  Field psi(g, Rep::physical, false);
  Field bp = to_physical(h.b);
  for (std::size_t i = 0; i < psi.size(); ++i)
    psi[i] = std::polar(std::sqrt(1.0 + coeff * bp[i].real()),
                        phi_p[i].real());
  return psi;
}

namespace detail {

// d = (-Lap)^{-1/2} div v in Fourier variables; mean and Nyquist zeroed
inline Field d_from_vector(const VectorField& v) {
  const GridSpec& g = v.grid();
  VectorField spec;
  for (const auto& c : v.comp) spec.comp.push_back(to_spectral(c));
  Field d(g, Rep::spectral, true);
  for (std::size_t i = 0; i < d.size(); ++i) {
    double xi_abs = g.xi_abs(i);
    if (xi_abs == 0.0) continue;
    bool nyq = false;
    for (int a = 0; a < g.dim; ++a)
      nyq = nyq || g.is_nyquist_index(g.axis_index(i, a));
    if (nyq) continue;
    cplx dot = 0.0;
    for (int a = 0; a < g.dim; ++a)
      dot += g.xi_component(i, a) * spec.comp[a][i];
    d[i] = cplx(0.0, 1.0) * dot / xi_abs;
  }
  return d;
}

// inverse of d_from_vector for gradient fields (zero mode handled by caller)
inline VectorField vector_from_d(const Field& d_spectral) {
  const GridSpec& g = d_spectral.grid();
  VectorField v = VectorField::zero(g, Rep::spectral, true);
  for (std::size_t i = 0; i < d_spectral.size(); ++i) {
    double xi_abs = g.xi_abs(i);
    if (xi_abs == 0.0) continue;
    for (int a = 0; a < g.dim; ++a)
      v.comp[a][i] =
          -cplx(0.0, 1.0) * g.xi_component(i, a) * d_spectral[i] / xi_abs;
  }
  return v;
}

inline double symmetrizer_multiplier(double eps, double xi2) {
  return std::sqrt(1.0 + 0.5 * eps * eps * xi2);
}

}  // namespace detail

inline SymmetrizedState symmetrize_pair(const Field& b, const VectorField& v,
                                        const PerturbationParams& p,
                                        double time = 0.0) {
  Field c = to_spectral(b);
  const GridSpec& g = c.grid();
  for (std::size_t i = 0; i < c.size(); ++i)
    c[i] *= detail::symmetrizer_multiplier(p.eps, g.xi_squared(i));
  SymmetrizedState s;
  s.time = time;
  s.c = std::move(c);
  s.d = detail::d_from_vector(v);
  return s;
}

inline SymmetrizedState symmetrize(const HydroState& h,
                                   const PerturbationParams& p) {
  return symmetrize_pair(h.b, h.v, p, h.time);
}

inline std::pair<Field, VectorField> desymmetrize(const SymmetrizedState& s,
                                                  const PerturbationParams& p) {
  Field b = to_spectral(s.c);
  const GridSpec& g = b.grid();
  for (std::size_t i = 0; i < b.size(); ++i)
    b[i] /= detail::symmetrizer_multiplier(p.eps, g.xi_squared(i));
  Field bp = to_physical(b);
  detail::zero_imag(bp);
  VectorField v = detail::vector_from_d(to_spectral(s.d));
  VectorField vp;
  for (auto& c : v.comp) {
    Field pc = to_physical(c);
    detail::zero_imag(pc);
    vp.comp.push_back(std::move(pc));
  }
  return {std::move(bp), std::move(vp)};
}

enum class BandScheme { low_high, small_mid_high };

// Sharp indicator cutoffs at r*nu and R/eps; the parts always sum back to f.
//   low_high:       f_l (|xi| <= R/eps), f_h (|xi| > R/eps)
//   small_mid_high: f_s (|xi| <= r nu), f_m (r nu < |xi| <= R/eps), f_h
inline std::vector<Field> band_split(const Field& f,
                                     const PerturbationParams& p,
                                     BandScheme scheme) {
  Field sp = to_spectral(f);
  const GridSpec& g = sp.grid();
  const double lo = p.low_threshold();
  const double hi = p.high_threshold();
  int nparts = scheme == BandScheme::low_high ? 2 : 3;
  std::vector<Field> parts(nparts,
                           Field(g, Rep::spectral, f.is_real_tagged()));
  for (std::size_t i = 0; i < sp.size(); ++i) {
    double xi = g.xi_abs(i);
    int which;
    if (scheme == BandScheme::low_high) {
      which = xi <= hi ? 0 : 1;
    } else {
      which = xi <= lo ? 0 : (xi <= hi ? 1 : 2);
    }
    parts[which][i] = sp[i];
  }
  return parts;
}

// M0 = ||(a0, u0)||_{H^s} + eps ||a0||_{H^{s+1}} + ||phi0||_{L^2}, u0 = 2 grad(phi0)
inline double compute_M0(const Field& a0, const Field& phi0,
                         const PerturbationParams& p) {
  VectorField u0 = gradient(phi0) * 2.0;
  return pair_sobolev_norm(a0, u0, p.s) +
         p.eps * sobolev_norm(a0, p.s + 1) + l2_norm(phi0);
}

// residuals of the built-in identities, used as state-validity diagnostics

// checks z against v - i grad(rho^2)/rho^2, i.e. the quotient-rule route for
// grad ln(rho^2) instead of the log-then-differentiate route used to build z
inline double z_identity_residual(const HydroState& h) {
  Field m = to_physical(h.rho_sq);
  VectorField gm = gradient(h.rho_sq);
  double acc = 0.0;
  for (int a = 0; a < h.v.dim(); ++a) {
    Field gp = to_physical(gm.comp[a]);
    Field diff(h.b.grid(), Rep::physical, false);
    for (std::size_t i = 0; i < diff.size(); ++i) {
      double glog = gp[i].real() / m[i].real();
      diff[i] = h.z.comp[a][i] -
                (h.v.comp[a][i].real() - cplx(0.0, 1.0) * glog);
    }
    double n = l2_norm(diff);
    acc += n * n;
  }
  return std::sqrt(acc);
}

// || (eps/sqrt2) grad b + (1 + (eps/sqrt2) b) Im z ||_{L^2}
inline double gain_derivative_residual(const HydroState& h,
                                       const PerturbationParams& p) {
  const double coeff = p.eps / std::numbers::sqrt2;
  Field bp = to_physical(h.b);
  double acc = 0.0;
  for (int a = 0; a < h.v.dim(); ++a) {
    Field gb = to_physical(derivative(h.b, a, 1));
    Field r(h.b.grid(), Rep::physical, true);
    for (std::size_t i = 0; i < r.size(); ++i)
      r[i] = coeff * gb[i].real() +
             (1.0 + coeff * bp[i].real()) * h.z.comp[a][i].imag();
    double n = l2_norm(r);
    acc += n * n;
  }
  return std::sqrt(acc);
}

}  // namespace cglwave
