#pragma once

#include <cmath>
#include <optional>
#include <vector>

#include "cglwave/field.hpp"
#include "cglwave/params.hpp"

namespace cglwave {

// Quadrature is the trapezoid rule on the uniform grid, which for periodic
// smooth fields coincides with the rectangle rule and is spectrally accurate.
inline double quadrature_real(const Field& f) {
  assert(f.rep() == Rep::physical);
  double s = 0.0;
  for (const auto& x : f.values()) s += x.real();
  return s * f.grid().cell_volume();
}

inline double l2_norm(const Field& f) {
  Field p = to_physical(f);
  double s = 0.0;
  for (const auto& x : p.values()) s += std::norm(x);
  return std::sqrt(s * f.grid().cell_volume());
}

// H^s norm via the Fourier multiplier (1 + |xi|^2)^{s/2}, normalized so that
// s = 0 reproduces the L^2 integral norm.
inline double sobolev_norm(const Field& f, double s) {
  Field sp = to_spectral(f);
  const GridSpec& g = sp.grid();
  double acc = 0.0;
  for (std::size_t i = 0; i < sp.size(); ++i)
    acc += std::pow(1.0 + g.xi_squared(i), s) * std::norm(sp[i]);
  double vol = g.dim == 1 ? g.length : g.length * g.length;
  return std::sqrt(acc * vol);
}

inline double sobolev_norm(const VectorField& v, double s) {
  double acc = 0.0;
  for (const auto& c : v.comp) {
    double x = sobolev_norm(c, s);
    acc += x * x;
  }
  return std::sqrt(acc);
}

// ||(a, u)||_{H^s} = (||a||^2 + sum_i ||u_i||^2)^{1/2}
inline double pair_sobolev_norm(const Field& a, const VectorField& u, double s) {
  double na = sobolev_norm(a, s);
  double nu = sobolev_norm(u, s);
  return std::sqrt(na * na + nu * nu);
}

inline double linf_norm(const Field& f) {
  Field p = to_physical(f);
  double m = 0.0;
  for (const auto& x : p.values()) m = std::max(m, std::abs(x));
  return m;
}

// pointwise vector magnitude sup: max_x (sum_j |v_j(x)|^2)^{1/2}
inline double linf_norm(const VectorField& v) {
  std::vector<Field> phys;
  for (const auto& c : v.comp) phys.push_back(to_physical(c));
  double m = 0.0;
  for (std::size_t i = 0; i < phys.front().size(); ++i) {
    double s = 0.0;
    for (const auto& c : phys) s += std::norm(c[i]);
    m = std::max(m, std::sqrt(s));
  }
  return m;
}

inline double binomial(int n, int k) {
  double r = 1.0;
  for (int j = 1; j <= k; ++j) r = r * (n - k + j) / j;
  return r;
}

// |D^k f|^2 = sum_{|alpha|=k} (k!/alpha!) |d^alpha f|^2 as a physical field.
// The multinomial weights make the k = 1 case exactly |grad f|^2.
inline Field dk_square(const Field& f, int k) {
  assert(k >= 0);
  const GridSpec& g = f.grid();
  if (k == 0) return abs_squared(to_physical(f));
  Field out(g, Rep::physical, true);
  if (g.dim == 1) {
    Field d = to_physical(derivative(f, 0, k));
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = std::norm(d[i]);
    return out;
  }
  for (int j = 0; j <= k; ++j) {
    Field d = to_physical(derivative(derivative(f, 0, j), 1, k - j));
    double w = binomial(k, j);
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += w * std::norm(d[i]);
  }
  return out;
}

inline Field dk_square(const VectorField& v, int k) {
  Field out = dk_square(v.comp[0], k);
  for (int c = 1; c < v.dim(); ++c) {
    Field d = dk_square(v.comp[c], k);
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += d[i];
  }
  return out;
}

// Gamma^k(b,z) = int |D^k b|^2 + int (1 + (eps/sqrt2) b) |D^k z|^2.
// The weight must stay positive; z = nullopt means Gamma^k(b, 0).
inline double gamma_seminorm(const Field& b,
                             const std::optional<VectorField>& z, int k,
                             const PerturbationParams& p) {
  Field bp = to_physical(b);
  double coeff = p.eps / std::numbers::sqrt2;
  if (z) {
    double wmin = 1.0;
    for (const auto& x : bp.values())
      wmin = std::min(wmin, 1.0 + coeff * x.real());
    if (!(wmin > 0.0))
      throw regime_violation(
          "gamma_seminorm: weight 1 + (eps/sqrt2) b is nonpositive somewhere "
          "(min = " + std::to_string(wmin) + ")");
  }
  Field db = dk_square(b, k);
  double acc = 0.0;
  for (std::size_t i = 0; i < db.size(); ++i) acc += db[i].real();
  if (z) {
    Field dz = dk_square(*z, k);
    for (std::size_t i = 0; i < dz.size(); ++i)
      acc += (1.0 + coeff * bp[i].real()) * dz[i].real();
  }
  return acc * b.grid().cell_volume();
}

// E_eps(psi) = int |grad psi|^2 / 2 + (1 - |psi|^2)^2 / (4 eps^2)
inline double gl_energy(const Field& psi, const PerturbationParams& p) {
  const GridSpec& g = psi.grid();
  Field grad2 = dk_square(psi, 1);
  Field pp = to_physical(psi);
  double acc = 0.0;
  const double c = 1.0 / (4.0 * p.eps * p.eps);
  for (std::size_t i = 0; i < pp.size(); ++i) {
    double dev = 1.0 - std::norm(pp[i]);
    acc += 0.5 * grad2[i].real() + c * dev * dev;
  }
  return acc * g.cell_volume();
}

}  // namespace cglwave
