#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "cglwave/hydro.hpp"
#include "cglwave/two_by_two.hpp"

namespace cglwave {

// Mode matrices of the three linear comparison models. The damped-wave and
// parabolic matrices live in the slow frame; the symmetrized M(xi) and the
// (b,v) matrix live in the parabolic frame (one is the other divided by eps).

inline TwoByTwoFlow mode_matrix_cd(double xi_abs, const PerturbationParams& p) {
  return make_mode_propagator(xi_abs, p).matrix;
}

inline TwoByTwoFlow mode_matrix_damped_wave(double xi_abs, double nu) {
  return TwoByTwoFlow{2.0 * nu, std::numbers::sqrt2 * xi_abs, 0.0};
}

inline TwoByTwoFlow mode_matrix_parabolic(double xi_abs,
                                          const PerturbationParams& p) {
  const double diff = p.kappa * p.eps * xi_abs * xi_abs;
  return TwoByTwoFlow{2.0 * p.nu() + diff, std::numbers::sqrt2 * xi_abs, diff};
}

namespace detail {

template <typename FlowOfXi>
std::pair<Field, Field> propagate_scalar_pair(const Field& top,
                                              const Field& bot, double t,
                                              FlowOfXi&& flow_of_xi) {
  Field a = to_spectral(top);
  Field b = to_spectral(bot);
  const GridSpec& g = a.grid();
  for (std::size_t i = 0; i < a.size(); ++i) {
    Mat2 m = semigroup_closed_form(flow_of_xi(g.xi_abs(i)), t);
    apply(m, a[i], b[i]);
  }
  return {std::move(a), std::move(b)};
}

// (a, u) models: u enters through its longitudinal scalar d_u; the u zero
// mode is a fixed point of both models and is carried through unchanged.
template <typename FlowOfXi>
std::pair<Field, VectorField> propagate_scalar_vector(const Field& a0,
                                                      const VectorField& u0,
                                                      double t,
                                                      FlowOfXi&& flow_of_xi) {
  Field d = d_from_vector(u0);
  auto [a, dt] = propagate_scalar_pair(a0, d, t, flow_of_xi);
  VectorField u = vector_from_d(dt);
  VectorField u0s;
  for (const auto& c : u0.comp) u0s.comp.push_back(to_spectral(c));
  for (int c = 0; c < u.dim(); ++c) u.comp[c][0] = u0s.comp[c][0];
  Field ap = to_physical(a);
  zero_imag(ap);
  VectorField up;
  for (auto& c : u.comp) {
    Field pc = to_physical(c);
    zero_imag(pc);
    up.comp.push_back(std::move(pc));
  }
  return {std::move(ap), std::move(up)};
}

}  // namespace detail

// exact-in-time flow of the homogeneous symmetrized system
inline std::pair<Field, Field> propagate_cd(const Field& c0, const Field& d0,
                                            const PerturbationParams& p,
                                            double t) {
  return detail::propagate_scalar_pair(
      c0, d0, t, [&](double xi) { return mode_matrix_cd(xi, p); });
}

// damped wave: propagation speed sqrt(2), damping coefficient 2 nu
inline std::pair<Field, VectorField> propagate_damped_wave(
    const Field& a0, const VectorField& u0, double nu, double t) {
  return detail::propagate_scalar_vector(
      a0, u0, t, [&](double xi) { return mode_matrix_damped_wave(xi, nu); });
}

// damped wave plus the kappa*eps*Laplacian smoothing on both components
inline std::pair<Field, VectorField> propagate_parabolic(
    const Field& a0, const VectorField& u0, const PerturbationParams& p,
    double t) {
  return detail::propagate_scalar_vector(
      a0, u0, t, [&](double xi) { return mode_matrix_parabolic(xi, p); });
}

// ---- numerical certification of the per-regime semigroup envelopes ----

struct RegimeFit {
  double C = 0.0;          // minimal feasible prefactor over the sweep
  double c = 0.0;          // exponential rate constant (low band only)
  double worst_ratio = 0.0;  // max LHS/envelope at the fitted constants
  int points = 0;
  bool feasible = true;
};

struct BoundReport {
  RegimeFit low;   // |xi| <= r nu: damping + slow-diffusion envelope
  RegimeFit high;  // |xi| >= r nu: pure damping envelope
  std::vector<double> xi_grid;
  std::vector<double> t_grid;
  int circle_samples = 0;
  double eps = 0.0, kappa = 0.0;
};

namespace detail {

inline double vec1_norm(double a, double b) {
  return std::abs(a) + std::abs(b);
}

// |e^{-tM(xi)}(a,b)| in the |a|+|b| norm, maximized over unit vectors
// sampled on a circle
inline double semigroup_lhs(const Mat2& m, double ca, double sa) {
  return vec1_norm(m.m00 * ca + m.m01 * sa, m.m10 * ca + m.m11 * sa);
}

}  // namespace detail

// Sweeps |e^{-tM(xi)} (a,b)| against the two regime envelopes and returns the
// smallest constants that make the envelopes hold on the sweep:
//   low band  (|xi| <= r nu):  C e^{-nu eps |xi|^2 t} [ e^{-nu t/eps} (|a|+|b|)
//                              + e^{-c |xi|^2 t/(nu eps)} (|xi|/nu |a| + |b|) ]
//   high band (|xi| >= r nu):  C e^{-nu (1 + eps^2 |xi|^2) t/(2 eps)} (|a|+|b|)
// The rate constant c is scanned over a fixed grid and chosen to minimize C.
inline BoundReport verify_semigroup_bounds(const PerturbationParams& p,
                                           const std::vector<double>& xi_grid,
                                           const std::vector<double>& t_grid,
                                           int circle_samples = 16) {
  if (!(p.kappa < kappa0()))
    throw config_error(
        "verify_semigroup_bounds requires kappa < kappa0 = sqrt(8/9); got "
        "kappa = " + std::to_string(p.kappa));

  BoundReport rep;
  rep.xi_grid = xi_grid;
  rep.t_grid = t_grid;
  rep.circle_samples = circle_samples;
  rep.eps = p.eps;
  rep.kappa = p.kappa;

  const double nu = p.nu();
  const double rnu = p.low_threshold();

  std::vector<double> c_candidates;
  for (int i = 1; i <= 20; ++i) c_candidates.push_back(0.05 * i);

  std::vector<std::pair<double, double>> angles;
  for (int i = 0; i < circle_samples; ++i) {
    double th = 2.0 * std::numbers::pi * (i + 0.5) / circle_samples;
    angles.emplace_back(std::cos(th), std::sin(th));
  }

  double best_low_C = std::numeric_limits<double>::infinity();
  double best_low_c = 0.0;
  double high_C = 0.0;
  int low_pts = 0, high_pts = 0;

  for (double c_try : c_candidates) {
    double low_C = 0.0;
    for (double xi : xi_grid) {
      if (xi > rnu) continue;
      for (double t : t_grid) {
        Mat2 m = semigroup_closed_form(mode_matrix_cd(xi, p), t);
        for (auto [ca, sa] : angles) {
          double lhs = detail::semigroup_lhs(m, ca, sa);
          double env =
              std::exp(-nu * p.eps * xi * xi * t) *
              (std::exp(-nu * t / p.eps) * detail::vec1_norm(ca, sa) +
               std::exp(-c_try * xi * xi * t / (nu * p.eps)) *
                   detail::vec1_norm(xi / nu * ca, sa));
          if (env > 0.0) low_C = std::max(low_C, lhs / env);
        }
      }
    }
    if (low_C < best_low_C) {
      best_low_C = low_C;
      best_low_c = c_try;
    }
  }

  for (double xi : xi_grid) {
    bool low = xi <= rnu;
    if (low) ++low_pts;
    if (!(xi >= rnu)) continue;
    ++high_pts;
    for (double t : t_grid) {
      Mat2 m = semigroup_closed_form(mode_matrix_cd(xi, p), t);
      double env = std::exp(-nu * (1.0 + p.eps * p.eps * xi * xi) * t /
                            (2.0 * p.eps));
      for (auto [ca, sa] : angles) {
        double lhs = detail::semigroup_lhs(m, ca, sa);
        double den = env * detail::vec1_norm(ca, sa);
        if (den > 0.0) high_C = std::max(high_C, lhs / den);
      }
    }
  }

  rep.low = RegimeFit{best_low_C, best_low_c, best_low_C, low_pts,
                      std::isfinite(best_low_C)};
  rep.high = RegimeFit{high_C, 0.0, high_C, high_pts, std::isfinite(high_C)};
  return rep;
}

inline std::vector<double> log_spaced(double lo, double hi, int count) {
  std::vector<double> out;
  out.reserve(count);
  for (int i = 0; i < count; ++i) {
    double f = count == 1 ? 0.0 : static_cast<double>(i) / (count - 1);
    out.push_back(lo * std::pow(hi / lo, f));
  }
  return out;
}

inline std::vector<double> standard_xi_grid(int count) {
  return log_spaced(1e-2, 1e3, count);
}

inline std::vector<double> standard_t_grid(const PerturbationParams& p) {
  return {0.01 * p.eps, 0.1 * p.eps, 1.0 * p.eps, 10.0 * p.eps};
}

}  // namespace cglwave
