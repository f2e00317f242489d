#pragma once

#include <complex>
#include <map>
#include <mutex>
#include <utility>
#include <vector>

#include <fftw3.h>

#include "cglwave/grid.hpp"

namespace cglwave::detail {

// Cached in-place c2c FFTW plans keyed by (dim, n). Plans are created with
// FFTW_UNALIGNED so fftw_execute_dft may run on any buffer of the right size;
// the cache mutex only guards plan creation, execution is lock-free.
class FftPlanCache {
 public:
  static fftw_plan get(const GridSpec& g, int sign) {
    static FftPlanCache cache;
    std::lock_guard<std::mutex> lock(cache.mutex_);
    auto key = std::make_tuple(g.dim, g.n, sign);
    auto it = cache.plans_.find(key);
    if (it != cache.plans_.end()) return it->second;
    std::vector<std::complex<double>> scratch(g.total());
    auto* ptr = reinterpret_cast<fftw_complex*>(scratch.data());
    fftw_plan plan =
        g.dim == 1
            ? fftw_plan_dft_1d(g.n, ptr, ptr, sign,
                               FFTW_ESTIMATE | FFTW_UNALIGNED)
            : fftw_plan_dft_2d(g.n, g.n, ptr, ptr, sign,
                               FFTW_ESTIMATE | FFTW_UNALIGNED);
    cache.plans_.emplace(key, plan);
    return plan;
  }

 private:
  FftPlanCache() = default;
  ~FftPlanCache() {
    for (auto& [key, plan] : plans_) fftw_destroy_plan(plan);
  }
  std::mutex mutex_;
  std::map<std::tuple<int, int, int>, fftw_plan> plans_;
};

// Forward transform carries the 1/N normalization so that a constant field c
// has spectrum c at xi = 0 and Parseval reads  (1/N) sum |f_j|^2 = sum |fhat_k|^2.
inline void fft_forward(const GridSpec& g,
                        std::vector<std::complex<double>>& v) {
  fftw_plan plan = FftPlanCache::get(g, FFTW_FORWARD);
  auto* ptr = reinterpret_cast<fftw_complex*>(v.data());
  fftw_execute_dft(plan, ptr, ptr);
  const double scale = 1.0 / static_cast<double>(g.total());
  for (auto& x : v) x *= scale;
}

inline void fft_backward(const GridSpec& g,
                         std::vector<std::complex<double>>& v) {
  fftw_plan plan = FftPlanCache::get(g, FFTW_BACKWARD);
  auto* ptr = reinterpret_cast<fftw_complex*>(v.data());
  fftw_execute_dft(plan, ptr, ptr);
}

}  // namespace cglwave::detail
