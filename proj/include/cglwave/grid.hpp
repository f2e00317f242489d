#pragma once

#include <cmath>
#include <cstddef>
#include <numbers>
#include <string>

#include "cglwave/errors.hpp"

namespace cglwave {

// Uniform periodic grid on [0,L)^dim. Spectral data uses the FFTW mode
// ordering k in {0,...,n/2-1, -n/2,...,-1} per axis, so the wavenumber
// lattice xi_k = 2*pi*k/L is symmetric except for the lone Nyquist index.
struct GridSpec {
  int dim = 1;        // 1 or 2
  int n = 0;          // points per axis, power of two >= 16
  double length = 0;  // period L

  std::size_t total() const {
    return dim == 1 ? static_cast<std::size_t>(n)
                    : static_cast<std::size_t>(n) * static_cast<std::size_t>(n);
  }
  double dx() const { return length / n; }
  double cell_volume() const {
    double h = dx();
    return dim == 1 ? h : h * h;
  }

  int k_of(int i) const { return i < n / 2 ? i : i - n; }
  bool is_nyquist_index(int i) const { return i == n / 2; }
  double xi_of_k(int k) const { return 2.0 * std::numbers::pi * k / length; }

  // flat index <-> per-axis indices, row major (axis 0 slowest)
  int axis_index(std::size_t flat, int axis) const {
    if (dim == 1) return static_cast<int>(flat);
    return axis == 0 ? static_cast<int>(flat) / n : static_cast<int>(flat) % n;
  }
  double coordinate(std::size_t flat, int axis) const {
    return axis_index(flat, axis) * dx();
  }
  double xi_component(std::size_t flat, int axis) const {
    return xi_of_k(k_of(axis_index(flat, axis)));
  }
  double xi_squared(std::size_t flat) const {
    double s = 0.0;
    for (int a = 0; a < dim; ++a) {
      double x = xi_component(flat, a);
      s += x * x;
    }
    return s;
  }
  double xi_abs(std::size_t flat) const { return std::sqrt(xi_squared(flat)); }
  double xi_max_abs() const {
    double x = xi_of_k(n / 2);
    return dim == 1 ? x : x * std::numbers::sqrt2;
  }

  bool operator==(const GridSpec&) const = default;
};

inline bool is_power_of_two(int n) { return n > 0 && (n & (n - 1)) == 0; }

inline GridSpec make_grid(int dim, int n, double length) {
  if (dim != 1 && dim != 2)
    throw config_error("grid.dim must be 1 or 2, got " + std::to_string(dim));
  if (!is_power_of_two(n) || n < 16)
    throw config_error("grid.n must be a power of two >= 16, got " +
                       std::to_string(n));
  if (!(length > 0.0))
    throw config_error("grid.length must be positive");
  return GridSpec{dim, n, length};
}

// default box: sixteen unit wavelengths, xi_k = k/16
inline double default_length() { return 2.0 * std::numbers::pi * 16.0; }

}  // namespace cglwave
