#pragma once

#include <cmath>
#include <complex>

#include "cglwave/params.hpp"

namespace cglwave {

struct Mat2 {
  double m00 = 1.0, m01 = 0.0, m10 = 0.0, m11 = 1.0;
};

// Generator A = [[p, q], [-q, r]]. Covers the symmetrized mode matrix M(xi),
// the slow-frame homogeneous matrix and the undamped wave matrix; the model
// constants enter only through (p, q, r).
struct TwoByTwoFlow {
  double p = 0.0, q = 0.0, r = 0.0;

  double sigma() const { return 0.5 * (p + r); }      // mean decay rate
  double delta() const { return 0.5 * (p - r); }      // asymmetric part
  double disc() const {                               // delta^2 - q^2
    double d = delta();
    return d * d - q * q;
  }
};

// exp(-tA) in closed form. Writing A = sigma I + B with B^2 = disc * I gives
//   exp(-tA) = e^{-sigma t} [ cosh(tau) I - (sinh(tau)/tau) tB ],  tau = t sqrt(disc),
// with the complex root: sqrt(disc) = i sqrt(-disc) for disc < 0, in which
// case cosh/sinh become cos/sin and the matrix stays real. Near the
// degenerate locus disc ~ 0 the sinh(tau)/tau factor switches to its even
// Taylor series in tau^2 (truncation error tau^6/5040).
inline Mat2 semigroup_closed_form(const TwoByTwoFlow& A, double t) {
  const double sigma = A.sigma();
  const double delta = A.delta();
  const double disc = A.disc();
  const double tau2 = t * t * disc;

  double ch, shc;  // e^{-sigma t} cosh(tau), e^{-sigma t} sinh(tau)/tau
  if (std::abs(tau2) <= 1e-5) {
    const double e = std::exp(-sigma * t);
    ch = e * (1.0 + tau2 / 2.0 + tau2 * tau2 / 24.0);
    shc = e * (1.0 + tau2 / 6.0 + tau2 * tau2 / 120.0);
  } else if (disc > 0.0) {
    const double tau = t * std::sqrt(disc);
    // factored exponentials: cosh alone would overflow long before the
    // product e^{-sigma t} cosh(tau) does
    const double ep = std::exp(tau - sigma * t);
    const double em = std::exp(-tau - sigma * t);
    ch = 0.5 * (ep + em);
    shc = 0.5 * (ep - em) / tau;
  } else {
    const double tau = t * std::sqrt(-disc);
    const double e = std::exp(-sigma * t);
    ch = e * std::cos(tau);
    shc = e * std::sin(tau) / tau;
  }

  const double td = shc * t * delta;
  const double tq = shc * t * A.q;
  return Mat2{ch - td, -tq, tq, ch + td};
}

inline void apply(const Mat2& m, std::complex<double>& a,
                  std::complex<double>& b) {
  std::complex<double> na = m.m00 * a + m.m01 * b;
  std::complex<double> nb = m.m10 * a + m.m11 * b;
  a = na;
  b = nb;
}

// Per-wavenumber data for the symmetrized system matrix
//   M(xi) = (nu/eps) [[2 + omega, mu], [-mu, omega]],
//   omega = eps^2 |xi|^2,  mu = |xi| sqrt(2 + omega)/nu,  Delta = 1 - mu^2,
// with eigenvalues lambda_{1,2} = (nu/eps)(omega + 1 -/+ sqrt[C]{Delta}) and
// alpha = 1 + sqrt[C]{Delta} (principal branch, imaginary for Delta < 0).
struct ModePropagator {
  double xi_abs = 0.0;
  double omega = 0.0;
  double mu = 0.0;
  double disc = 0.0;  // Delta = 1 - mu^2
  std::complex<double> alpha;
  std::complex<double> lambda1;
  std::complex<double> lambda2;
  TwoByTwoFlow matrix;  // entries of M(xi)
};

inline std::complex<double> complex_root(double x) {
  return x >= 0.0 ? std::complex<double>(std::sqrt(x), 0.0)
                  : std::complex<double>(0.0, std::sqrt(-x));
}

inline ModePropagator make_mode_propagator(double xi_abs,
                                           const PerturbationParams& p) {
  ModePropagator mp;
  mp.xi_abs = xi_abs;
  mp.omega = p.eps * p.eps * xi_abs * xi_abs;
  mp.mu = xi_abs * std::sqrt(2.0 + mp.omega) / p.nu();
  mp.disc = 1.0 - mp.mu * mp.mu;
  std::complex<double> root = complex_root(mp.disc);
  mp.alpha = 1.0 + root;
  const double scale = p.nu() / p.eps;
  mp.lambda2 = scale * (mp.omega + 1.0 + root);
  if (mp.disc >= 0.0) {
    // rationalized form of omega + 1 - sqrt(Delta): avoids the cancellation
    // at small mu, and makes lambda1*lambda2 = det(M) hold to roundoff
    const double num =
        mp.omega * mp.omega + 2.0 * mp.omega + mp.mu * mp.mu;
    mp.lambda1 = scale * num / (mp.omega + 1.0 + root.real());
  } else {
    mp.lambda1 = scale * (mp.omega + 1.0 - root);
  }
  mp.matrix = TwoByTwoFlow{scale * (2.0 + mp.omega), scale * mp.mu,
                           scale * mp.omega};
  return mp;
}

}  // namespace cglwave
