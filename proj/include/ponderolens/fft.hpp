#pragma once
#include <fftw3.h>

#include <complex>
#include <map>
#include <mutex>
#include <utility>
#include <vector>

namespace ponderolens::fft {

/// Process-wide cache of 1-D complex FFTW plans. Planning is serialised;
/// execution through the new-array interface is thread-safe.
class PlanCache {
 public:
  static PlanCache& instance() {
    static PlanCache c;
    return c;
  }
  fftw_plan get(int n, int sign) {
    std::lock_guard<std::mutex> lk(mu_);
    auto key = std::make_pair(n, sign);
    if (auto it = plans_.find(key); it != plans_.end()) return it->second;
    std::vector<std::complex<double>> a(n);
    auto* buf = reinterpret_cast<fftw_complex*>(a.data());
    fftw_plan p = fftw_plan_dft_1d(n, buf, buf, sign,
                                   FFTW_ESTIMATE | FFTW_UNALIGNED);
    plans_.emplace(key, p);
    return p;
  }
  ~PlanCache() {
    for (auto& [k, p] : plans_) fftw_destroy_plan(p);
  }

 private:
  PlanCache() = default;
  std::mutex mu_;
  std::map<std::pair<int, int>, fftw_plan> plans_;
};

/// Unnormalised forward (sign -1) or backward (+1) transform, in place.
inline void transform(std::complex<double>* data, int n, int sign) {
  fftw_plan p = PlanCache::instance().get(n, sign);
  auto* d = reinterpret_cast<fftw_complex*>(data);
  fftw_execute_dft(p, d, d);
}

inline int next_pow2(int n) {
  int p = 1;
  while (p < n) p <<= 1;
  return p;
}

}  // namespace ponderolens::fft
