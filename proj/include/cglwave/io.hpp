#pragma once

#include <bit>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "cglwave/config.hpp"
#include "cglwave/propagators.hpp"

namespace cglwave {

static_assert(std::endian::native == std::endian::little,
              "snapshot format is little-endian");

// ---- field snapshot: binary samples + JSON metadata sidecar ----
//
// <base>.bin layout (all little-endian):
//   u64 dim, u64 n, f64 length, f64 eps, f64 kappa, u64 s, f64 time,
//   u64 name_len, name bytes, u64 sample_count, u64 is_complex,
//   then sample_count f64 (real) or 2*sample_count f64 (re,im interleaved).
// <base>.json repeats the header for tooling that only wants metadata.

namespace detail {

inline void put_u64(std::ofstream& out, std::uint64_t v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof v);
}
inline void put_f64(std::ofstream& out, double v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof v);
}
inline std::uint64_t get_u64(std::ifstream& in) {
  std::uint64_t v = 0;
  in.read(reinterpret_cast<char*>(&v), sizeof v);
  return v;
}
inline double get_f64(std::ifstream& in) {
  double v = 0;
  in.read(reinterpret_cast<char*>(&v), sizeof v);
  return v;
}

}  // namespace detail

struct SnapshotMeta {
  int dim = 1, n = 0, s = 2;
  double length = 0, eps = 0, kappa = 0, time = 0;
  std::string variable;
  bool is_complex = false;
};

inline void write_field_snapshot(const std::string& base, const Field& field,
                                 const std::string& variable,
                                 const PerturbationParams& p, double time) {
  Field phys = to_physical(field);
  const GridSpec& g = phys.grid();
  const bool cplx_samples = !phys.is_real_tagged();

  std::ofstream bin(base + ".bin", std::ios::binary);
  if (!bin) throw config_error("cannot write " + base + ".bin");
  detail::put_u64(bin, g.dim);
  detail::put_u64(bin, g.n);
  detail::put_f64(bin, g.length);
  detail::put_f64(bin, p.eps);
  detail::put_f64(bin, p.kappa);
  detail::put_u64(bin, p.s);
  detail::put_f64(bin, time);
  detail::put_u64(bin, variable.size());
  bin.write(variable.data(), static_cast<std::streamsize>(variable.size()));
  detail::put_u64(bin, phys.size());
  detail::put_u64(bin, cplx_samples ? 1 : 0);
  for (const auto& x : phys.values()) {
    detail::put_f64(bin, x.real());
    if (cplx_samples) detail::put_f64(bin, x.imag());
  }

  nlohmann::json j{{"dim", g.dim},         {"n", g.n},
                   {"length", g.length},   {"eps", p.eps},
                   {"kappa", p.kappa},     {"s", p.s},
                   {"time", time},         {"variable", variable},
                   {"count", phys.size()}, {"complex", cplx_samples},
                   {"representation", "physical"}};
  std::ofstream side(base + ".json");
  side << j.dump(2) << "\n";
}

inline std::pair<Field, SnapshotMeta> read_field_snapshot(
    const std::string& base) {
  std::ifstream bin(base + ".bin", std::ios::binary);
  if (!bin) throw config_error("cannot read " + base + ".bin");
  SnapshotMeta m;
  m.dim = static_cast<int>(detail::get_u64(bin));
  m.n = static_cast<int>(detail::get_u64(bin));
  m.length = detail::get_f64(bin);
  m.eps = detail::get_f64(bin);
  m.kappa = detail::get_f64(bin);
  m.s = static_cast<int>(detail::get_u64(bin));
  m.time = detail::get_f64(bin);
  std::uint64_t name_len = detail::get_u64(bin);
  m.variable.resize(name_len);
  bin.read(m.variable.data(), static_cast<std::streamsize>(name_len));
  std::uint64_t count = detail::get_u64(bin);
  m.is_complex = detail::get_u64(bin) != 0;

  Field f(make_grid(m.dim, m.n, m.length), Rep::physical, !m.is_complex);
  if (count != f.size())
    throw config_error("snapshot sample count mismatch in " + base);
  for (std::size_t i = 0; i < f.size(); ++i) {
    double re = detail::get_f64(bin);
    double im = m.is_complex ? detail::get_f64(bin) : 0.0;
    f[i] = cplx(re, im);
  }
  if (!bin) throw config_error("snapshot truncated: " + base);
  return {std::move(f), std::move(m)};
}

// ---- CSV with a fixed column order and 17-significant-digit floats ----

inline std::string format_g17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

class CsvWriter {
 public:
  CsvWriter(const std::string& path, const std::vector<std::string>& columns)
      : out_(path) {
    if (!out_) throw config_error("cannot write " + path);
    for (std::size_t i = 0; i < columns.size(); ++i)
      out_ << (i ? "," : "") << columns[i];
    out_ << "\n";
  }
  void row(const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i)
      out_ << (i ? "," : "") << cells[i];
    out_ << "\n";
  }
  void row_numeric(const std::vector<double>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i)
      out_ << (i ? "," : "") << format_g17(cells[i]);
    out_ << "\n";
  }

 private:
  std::ofstream out_;
};

inline nlohmann::json to_json(const RegimeFit& f) {
  return {{"C", f.C},
          {"c", f.c},
          {"worst_ratio", f.worst_ratio},
          {"points", f.points},
          {"feasible", f.feasible}};
}

inline nlohmann::json to_json(const BoundReport& r) {
  return {{"low_band", to_json(r.low)},
          {"high_band", to_json(r.high)},
          {"eps", r.eps},
          {"kappa", r.kappa},
          {"xi_points", r.xi_grid.size()},
          {"xi_min", r.xi_grid.empty() ? 0.0 : r.xi_grid.front()},
          {"xi_max", r.xi_grid.empty() ? 0.0 : r.xi_grid.back()},
          {"t_grid", r.t_grid},
          {"circle_samples", r.circle_samples}};
}

inline nlohmann::json to_json(const ScalingFit& f) {
  return {{"abscissa", f.abscissa},       {"slope", f.slope},
          {"slope_stderr", f.slope_stderr}, {"constant", f.constant},
          {"residual", f.residual},       {"window", f.window},
          {"inconclusive", f.inconclusive}};
}

}  // namespace cglwave
