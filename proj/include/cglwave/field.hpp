#pragma once

#include <cassert>
#include <complex>
#include <functional>
#include <vector>

#include "cglwave/fft.hpp"
#include "cglwave/grid.hpp"

namespace cglwave {

using cplx = std::complex<double>;

enum class Rep { physical, spectral };
enum class Direction { forward, inverse };  // forward: physical -> spectral

// Sampled scalar field on a periodic grid. Values are always stored complex;
// a real-tagged field promises a Hermitian-symmetric spectrum (equivalently,
// physical samples with vanishing imaginary part up to roundoff).
class Field {
 public:
  Field() = default;
  Field(GridSpec grid, Rep rep, bool real_tagged)
      : grid_(grid), rep_(rep), real_(real_tagged), v_(grid.total(), cplx{}) {}

  static Field zero(const GridSpec& g, Rep rep = Rep::physical,
                    bool real_tagged = true) {
    return Field(g, rep, real_tagged);
  }
  static Field constant(const GridSpec& g, cplx value) {
    Field f(g, Rep::physical, value.imag() == 0.0);
    for (auto& x : f.v_) x = value;
    return f;
  }

  const GridSpec& grid() const { return grid_; }
  Rep rep() const { return rep_; }
  bool is_real_tagged() const { return real_; }
  void set_real_tagged(bool r) { real_ = r; }
  std::size_t size() const { return v_.size(); }

  cplx& operator[](std::size_t i) { return v_[i]; }
  const cplx& operator[](std::size_t i) const { return v_[i]; }
  std::vector<cplx>& values() { return v_; }
  const std::vector<cplx>& values() const { return v_; }

  void transform_inplace(Direction dir) {
    if (dir == Direction::forward) {
      assert(rep_ == Rep::physical);
      detail::fft_forward(grid_, v_);
      rep_ = Rep::spectral;
    } else {
      assert(rep_ == Rep::spectral);
      detail::fft_backward(grid_, v_);
      rep_ = Rep::physical;
    }
  }

 private:
  GridSpec grid_{};
  Rep rep_ = Rep::physical;
  bool real_ = true;
  std::vector<cplx> v_;
};

inline Field transform(const Field& f, Direction dir) {
  Field out = f;
  out.transform_inplace(dir);
  return out;
}

inline Field to_spectral(const Field& f) {
  return f.rep() == Rep::spectral ? f : transform(f, Direction::forward);
}

inline Field to_physical(const Field& f) {
  return f.rep() == Rep::physical ? f : transform(f, Direction::inverse);
}

namespace detail {

// Drop the O(eps_mach) imaginary residue left by inverse transforms of
// Hermitian spectra. Only call where realness holds analytically.
inline void zero_imag(Field& f) {
  assert(f.rep() == Rep::physical);
  for (auto& x : f.values()) x = cplx(x.real(), 0.0);
}

template <typename MultiplierFn>
void apply_spectral_multiplier(Field& f, MultiplierFn&& m) {
  assert(f.rep() == Rep::spectral);
  const GridSpec& g = f.grid();
  for (std::size_t i = 0; i < f.size(); ++i) f[i] *= m(g, i);
}

}  // namespace detail

// Spectral differentiation with multiplier (i*xi)^order on each axis mode.
// Odd-order derivatives zero the Nyquist mode so real fields stay real.
inline Field derivative(const Field& f, int axis, int order) {
  assert(axis >= 0 && axis < f.grid().dim);
  assert(order >= 0);
  if (order == 0) return f;
  Field out = to_spectral(f);
  const GridSpec& g = out.grid();
  const bool odd = (order % 2) != 0;
  for (std::size_t i = 0; i < out.size(); ++i) {
    int ai = g.axis_index(i, axis);
    if (odd && g.is_nyquist_index(ai)) {
      out[i] = 0.0;
      continue;
    }
    double xi = g.xi_of_k(g.k_of(ai));
    out[i] *= std::pow(cplx(0.0, xi), order);
  }
  return out;
}

inline Field laplacian(const Field& f) {
  Field out = to_spectral(f);
  detail::apply_spectral_multiplier(out, [](const GridSpec& g, std::size_t i) {
    return cplx(-g.xi_squared(i), 0.0);
  });
  return out;
}

struct VectorField {
  std::vector<Field> comp;

  const GridSpec& grid() const { return comp.front().grid(); }
  int dim() const { return static_cast<int>(comp.size()); }
  Rep rep() const { return comp.front().rep(); }

  static VectorField zero(const GridSpec& g, Rep rep = Rep::physical,
                          bool real_tagged = true) {
    VectorField v;
    for (int a = 0; a < g.dim; ++a) v.comp.push_back(Field(g, rep, real_tagged));
    return v;
  }
};

inline VectorField gradient(const Field& f) {
  VectorField out;
  for (int a = 0; a < f.grid().dim; ++a) out.comp.push_back(derivative(f, a, 1));
  return out;
}

inline Field divergence(const VectorField& v) {
  Field out = derivative(v.comp[0], 0, 1);
  for (int a = 1; a < v.dim(); ++a) {
    Field d = derivative(v.comp[a], a, 1);
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += d[i];
  }
  return out;
}

// -- pointwise arithmetic (representation-agnostic where linear) --

inline Field& operator+=(Field& a, const Field& b) {
  assert(a.rep() == b.rep() && a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) a[i] += b[i];
  a.set_real_tagged(a.is_real_tagged() && b.is_real_tagged());
  return a;
}
inline Field& operator-=(Field& a, const Field& b) {
  assert(a.rep() == b.rep() && a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) a[i] -= b[i];
  a.set_real_tagged(a.is_real_tagged() && b.is_real_tagged());
  return a;
}
inline Field operator+(Field a, const Field& b) { return a += b; }
inline Field operator-(Field a, const Field& b) { return a -= b; }
inline Field operator*(Field a, double s) {
  for (std::size_t i = 0; i < a.size(); ++i) a[i] *= s;
  return a;
}
inline Field operator*(double s, Field a) { return a * s; }

inline VectorField operator-(VectorField a, const VectorField& b) {
  for (int c = 0; c < a.dim(); ++c) a.comp[c] -= b.comp[c];
  return a;
}
inline VectorField operator*(VectorField a, double s) {
  for (auto& c : a.comp) c = c * s;
  return a;
}

// physical-space product; caller dealiases the assembled nonlinear result
inline Field pointwise_multiply(const Field& a, const Field& b) {
  assert(a.rep() == Rep::physical && b.rep() == Rep::physical);
  Field out = a;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] *= b[i];
  out.set_real_tagged(a.is_real_tagged() && b.is_real_tagged());
  return out;
}

inline Field abs_squared(const Field& f) {
  assert(f.rep() == Rep::physical);
  Field out(f.grid(), Rep::physical, true);
  for (std::size_t i = 0; i < f.size(); ++i) out[i] = std::norm(f[i]);
  return out;
}

inline Field real_part(const Field& f) {
  assert(f.rep() == Rep::physical);
  Field out(f.grid(), Rep::physical, true);
  for (std::size_t i = 0; i < f.size(); ++i) out[i] = f[i].real();
  return out;
}

inline Field imag_part(const Field& f) {
  assert(f.rep() == Rep::physical);
  Field out(f.grid(), Rep::physical, true);
  for (std::size_t i = 0; i < f.size(); ++i) out[i] = f[i].imag();
  return out;
}

// 2/3-rule mask: zero every mode with |k| > n/3 on any axis
inline void dealias_inplace(Field& f) {
  assert(f.rep() == Rep::spectral);
  const GridSpec& g = f.grid();
  const int kmax = g.n / 3;
  for (std::size_t i = 0; i < f.size(); ++i) {
    for (int a = 0; a < g.dim; ++a) {
      int k = g.k_of(g.axis_index(i, a));
      if (std::abs(k) > kmax) {
        f[i] = 0.0;
        break;
      }
    }
  }
}

// Longitudinal (gradient-part) projection in Fourier space; also removes the
// mean so the result is the gradient of a periodic potential.
inline VectorField project_gradient(const VectorField& v) {
  const GridSpec& g = v.grid();
  VectorField spec;
  for (const auto& c : v.comp) spec.comp.push_back(to_spectral(c));
  VectorField out = VectorField::zero(g, Rep::spectral,
                                      v.comp.front().is_real_tagged());
  for (std::size_t i = 0; i < g.total(); ++i) {
    double xi2 = g.xi_squared(i);
    if (xi2 == 0.0) continue;  // kill the mean
    cplx dot = 0.0;
    for (int a = 0; a < g.dim; ++a)
      dot += g.xi_component(i, a) * spec.comp[a][i];
    for (int a = 0; a < g.dim; ++a)
      out.comp[a][i] = g.xi_component(i, a) * dot / xi2;
  }
  return out;
}

// max_k |fhat(-k) - conj(fhat(k))|, for the real-tag invariant
inline double hermitian_symmetry_error(const Field& f) {
  Field s = to_spectral(f);
  const GridSpec& g = s.grid();
  double worst = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    std::size_t j;
    if (g.dim == 1) {
      int i0 = static_cast<int>(i);
      j = static_cast<std::size_t>((g.n - i0) % g.n);
    } else {
      int i0 = g.axis_index(i, 0), i1 = g.axis_index(i, 1);
      j = static_cast<std::size_t>(((g.n - i0) % g.n)) * g.n +
          ((g.n - i1) % g.n);
    }
    worst = std::max(worst, std::abs(s[i] - std::conj(s[j])));
  }
  return worst;
}

}  // namespace cglwave
