#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace cglwave {

// Error taxonomy shared by all modules. The CLI maps these onto exit codes:
// config_error -> 2, regime_violation (incl. vanishing_risk) -> 3,
// numerical_instability -> 4.

class config_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class regime_violation : public std::runtime_error {
 public:
  explicit regime_violation(const std::string& what, double t = 0.0)
      : std::runtime_error(what), time(t) {}
  double time = 0.0;
};

// |psi| came too close to zero for the hydrodynamic lifting to stay valid.
// Carries the offending minimum and its flat grid index.
class vanishing_risk : public regime_violation {
 public:
  vanishing_risk(const std::string& what, double min_abs, std::size_t where,
                 double t)
      : regime_violation(what, t), min_abs_psi(min_abs), grid_index(where) {}
  double min_abs_psi = 0.0;
  std::size_t grid_index = 0;
};

class numerical_instability : public std::runtime_error {
 public:
  numerical_instability(const std::string& what, double t, double norm)
      : std::runtime_error(what), time(t), norm_at_failure(norm) {}
  double time = 0.0;
  double norm_at_failure = 0.0;
};

}  // namespace cglwave
