#pragma once
#include <algorithm>
#include <array>
#include <cmath>
#include <vector>

#include "grid.hpp"

namespace ponderolens {

/// Four-point Lagrange stencil on arbitrary increasing nodes. Returns false
/// when z lies outside [nodes.front(), nodes.back()].
struct Stencil4 {
  std::size_t first = 0;
  std::array<double, 4> w{};
  int count = 0;
};

inline bool lagrange_stencil(const std::vector<double>& nodes, double z, Stencil4& st) {
  const std::size_t n = nodes.size();
  if (n == 0 || z < nodes.front() || z > nodes.back()) return false;
  if (n == 1) {
    st = {0, {1, 0, 0, 0}, 1};
    return true;
  }
  std::size_t i = std::upper_bound(nodes.begin(), nodes.end(), z) - nodes.begin();
  i = std::clamp<std::size_t>(i, 1, n - 1) - 1;  // nodes[i] <= z <= nodes[i+1]
  const int cnt = int(std::min<std::size_t>(4, n));
  std::size_t first = (i >= 1) ? i - 1 : 0;
  if (first + cnt > n) first = n - cnt;
  st.first = first;
  st.count = cnt;
  for (int a = 0; a < cnt; ++a) {
    double w = 1.0;
    for (int b = 0; b < cnt; ++b)
      if (b != a) w *= (z - nodes[first + b]) / (nodes[first + a] - nodes[first + b]);
    st.w[a] = w;
  }
  return true;
}

/// Keys cubic convolution kernel (a = -1/2).
inline double keys(double s) {
  s = std::abs(s);
  if (s < 1) return (1.5 * s - 2.5) * s * s + 1.0;
  if (s < 2) return ((-0.5 * s + 2.5) * s - 4.0) * s + 2.0;
  return 0.0;
}

/// Bicubic resampling of a uniform map onto another grid; zero outside the source.
inline PhaseMap resample_bicubic(const PhaseMap& src, const Axis& ox, const Axis& oy) {
  PhaseMap out(ox, oy, 0.0);
  const double dx = src.x.step(), dy = src.y.step();
  const long nx = long(src.nx()), ny = long(src.ny());
  auto at = [&](long iy, long ix) {
    iy = std::clamp(iy, 0L, ny - 1);
    ix = std::clamp(ix, 0L, nx - 1);
    return src(std::size_t(iy), std::size_t(ix));
  };
  for (std::size_t j = 0; j < oy.n; ++j) {
    const double fy = dy > 0 ? (oy.at(j) - src.y.min) / dy : 0.0;
    if (fy < -1e-9 || fy > double(ny - 1) + 1e-9) continue;
    const long y0 = long(std::floor(fy));
    for (std::size_t i = 0; i < ox.n; ++i) {
      const double fx = dx > 0 ? (ox.at(i) - src.x.min) / dx : 0.0;
      if (fx < -1e-9 || fx > double(nx - 1) + 1e-9) continue;
      const long x0 = long(std::floor(fx));
      double acc = 0.0;
      for (long b = -1; b <= 2; ++b) {
        const double wy = keys(fy - double(y0 + b));
        if (wy == 0.0) continue;
        for (long a = -1; a <= 2; ++a) acc += wy * keys(fx - double(x0 + a)) * at(y0 + b, x0 + a);
      }
      out(j, i) = acc;
    }
  }
  return out;
}

}  // namespace ponderolens
