#pragma once

#include <cstdint>
#include <random>

#include "cglwave/field.hpp"
#include "cglwave/norms.hpp"

namespace cglwave {

// Band-limited real random field: Hermitian Gaussian coefficients on the
// modes 0 < max_axis|k| <= max_mode, rescaled so sobolev_norm(f, s) hits the
// target exactly (up to roundoff). Deterministic for a given seed.
inline Field band_limited_random(const GridSpec& g, int max_mode,
                                 double target_hs_norm, double s,
                                 std::uint64_t seed) {
  if (max_mode >= g.n / 2)
    throw config_error("band_limited_random: max_mode must be < n/2");
  if (target_hs_norm < 0.0)
    throw config_error("band_limited_random: target norm must be >= 0");

  Field f(g, Rep::spectral, true);
  if (target_hs_norm == 0.0) return to_physical(f);

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);

  auto flat = [&](int k0, int k1) {
    int i0 = (k0 + g.n) % g.n;
    if (g.dim == 1) return static_cast<std::size_t>(i0);
    int i1 = (k1 + g.n) % g.n;
    return static_cast<std::size_t>(i0) * g.n + i1;
  };

  if (g.dim == 1) {
    for (int k = 1; k <= max_mode; ++k) {
      cplx a(gauss(rng), gauss(rng));
      f[flat(k, 0)] = a;
      f[flat(-k, 0)] = std::conj(a);
    }
  } else {
    // half lattice (k0 > 0, or k0 == 0 and k1 > 0) keeps the spectrum Hermitian
    for (int k0 = 0; k0 <= max_mode; ++k0) {
      for (int k1 = -max_mode; k1 <= max_mode; ++k1) {
        if (k0 == 0 && k1 <= 0) continue;
        cplx a(gauss(rng), gauss(rng));
        f[flat(k0, k1)] = a;
        f[flat(-k0, -k1)] = std::conj(a);
      }
    }
  }

  double current = sobolev_norm(f, s);
  Field out = to_physical(f * (target_hs_norm / current));
  detail::zero_imag(out);
  return out;
}

}  // namespace cglwave
