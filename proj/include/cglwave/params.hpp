#pragma once

#include <cmath>
#include <string>

#include "cglwave/errors.hpp"

namespace cglwave {

// Regime parameters. nu = kappa/eps is the dissipation-to-perturbation ratio;
// split_r*nu and split_R/eps are the frequency thresholds separating the
// damping-dominated band from the parabolic-smoothing band.
struct PerturbationParams {
  double eps = 0.1;    // in (0, 1]
  double kappa = 0.1;  // in (0, 1)
  int s = 2;           // Sobolev index, s > 1 + dim/2
  double split_R = 1.0;

  double nu() const { return kappa / eps; }
  double split_r() const { return std::sqrt(3.0 / 8.0); }
  double low_threshold() const { return split_r() * nu(); }
  double high_threshold() const { return split_R / eps; }
};

// kappa_0 below which the low-frequency discriminant stays positive
inline double kappa0() { return std::sqrt(8.0 / 9.0); }

inline int default_s(int dim) { return dim == 1 ? 2 : 3; }

inline PerturbationParams make_params(double eps, double kappa, int s, int dim,
                                      double split_R = 1.0) {
  if (!(eps > 0.0) || eps > 1.0)
    throw config_error("eps must be in (0,1], got " + std::to_string(eps));
  if (!(kappa > 0.0) || kappa >= 1.0)
    throw config_error("kappa must be in (0,1), got " + std::to_string(kappa));
  if (2 * s <= 2 + dim)
    throw config_error("s must satisfy s > 1 + dim/2, got s=" +
                       std::to_string(s) + " at dim=" + std::to_string(dim));
  if (split_R < 1.0)
    throw config_error("split_R must be >= 1");
  PerturbationParams p{eps, kappa, s, split_R};
  if (!(p.low_threshold() < p.high_threshold()))
    throw config_error("frequency thresholds out of order: r*nu must be < R/eps");
  return p;
}

}  // namespace cglwave
