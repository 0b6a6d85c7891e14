#pragma once
#include <complex>
#include <cstddef>
#include <vector>

#include "errors.hpp"

namespace ponderolens {

using cplx = std::complex<double>;

/// Uniform sample axis covering [min, max] inclusively.
struct Axis {
  std::size_t n = 1;
  double min = 0, max = 0;

  double step() const { return n > 1 ? (max - min) / double(n - 1) : 0.0; }
  double at(std::size_t i) const { return n > 1 ? min + step() * double(i) : min; }
  /// Axis whose samples sit at (i - (n-1)/2) * pitch.
  static Axis centered(std::size_t n, double pitch) {
    const double h = 0.5 * double(n - 1) * pitch;
    return {n, -h, h};
  }
  static Axis symmetric(std::size_t n, double half) { return {n, -half, half}; }
  bool operator==(const Axis&) const = default;
};

/// Row-major 2-D grid, index (iy, ix) -> iy*nx + ix.
template <class T>
struct Grid2D {
  Axis x, y;
  std::vector<T> data;

  Grid2D() = default;
  Grid2D(Axis ax, Axis ay, T fill = T{}) : x(ax), y(ay), data(ax.n * ay.n, fill) {}
  std::size_t nx() const { return x.n; }
  std::size_t ny() const { return y.n; }
  T& operator()(std::size_t iy, std::size_t ix) { return data[iy * x.n + ix]; }
  const T& operator()(std::size_t iy, std::size_t ix) const { return data[iy * x.n + ix]; }
  bool same_grid(const Grid2D& o) const { return x == o.x && y == o.y; }
};

using ComplexField2D = Grid2D<cplx>;
using PhaseMap = Grid2D<double>;

/// Stack of 2-D maps sharing one transverse grid, one map per energy sample.
struct PhaseStack {
  Axis x, y;
  std::vector<double> energies;
  std::vector<PhaseMap> maps;

  std::size_t size() const { return maps.size(); }
};

inline void require_same_grid(const Axis& a, const Axis& b, const char* what) {
  if (!(a == b)) throw MismatchError(std::string("grid mismatch: ") + what);
}

}  // namespace ponderolens
