#pragma once
#include <algorithm>
#include <cmath>
#include <map>
#include <string>

#include "constants.hpp"
#include "grid.hpp"

namespace ponderolens {

/// Radial Zernike polynomial R_n^0 (edge value 1, no normalisation factor).
inline double zernike_radial(int n, double rho) {
  if (n < 0 || n % 2 != 0) throw DomainError("zernike_radial: n must be even and >= 0");
  if (!(rho >= 0.0 && rho <= 1.0)) throw DomainError("zernike_radial: rho outside [0, 1]");
  // Explicit sum, Horner-free; n <= 8 in practice.
  double acc = 0.0;
  const int m = n / 2;
  double coef = 1.0;  // (-1)^s (n-s)! / (s! ((n/2-s)!)^2), built for s = 0 first
  for (int k = 1; k <= n; ++k) coef *= k;
  for (int k = 1; k <= m; ++k) coef /= double(k) * double(k);
  for (int s = 0; s <= m; ++s) {
    acc += coef * std::pow(rho, n - 2 * s);
    // Ratio between consecutive terms.
    const double num = -double(m - s) * double(m - s);
    const double den = double(s + 1) * double(n - s);
    coef *= num / den;
  }
  return acc;
}

struct SlmSpec {
  int l = 0;
  double c0 = 1.0;                     ///< V/m
  std::map<int, double> zernike_weights;
  double w_o = 0;                      ///< m
  double pupil_radius = 0;             ///< m, normalises the Zernike argument
  double aperture_radius = 0;          ///< m, hard stop; 0 means pupil_radius
  int phase_levels = 0;                ///< quantisation per 2pi, 0 = continuous

  void validate() const {
    for (auto& [n, c] : zernike_weights)
      if (n < 2 || n % 2) throw ConfigError("slm.zernike: orders must be even and >= 2");
    if (!(pupil_radius > 0)) throw ConfigError("slm: pupil_radius must be > 0");
    if (!(w_o > 0)) throw ConfigError("slm: w_o must be > 0");
    if (phase_levels < 0) throw ConfigError("slm.phase_levels must be >= 0");
  }
  /// Hard aperture radius; never beyond rho = 1.
  double stop() const { return aperture_radius > 0 ? aperture_radius : pupil_radius; }
};

struct PupilGrid {
  std::size_t n = 1024;
  double pitch = 0;
  Axis axis() const { return Axis::centered(n, pitch); }
  /// Square grid whose outer pixel edges coincide with the disk of radius r.
  static PupilGrid covering(std::size_t n, double r) { return {n, 2.0 * r / double(n)}; }
};

/// Phase added by the SLM at radius r (without the vortex term).
inline double slm_radial_phase(const SlmSpec& s, double r) {
  const double rho = std::min(r / s.pupil_radius, 1.0);
  double sum = 0.0;
  for (auto& [n, c] : s.zernike_weights) sum += c * zernike_radial(n, rho);
  return constants::pi * sum;
}

inline double quantise_phase(double ph, int levels) {
  if (levels <= 0) return ph;
  const double q = 2.0 * constants::pi / levels;
  return std::round(ph / q) * q;
}

/// x-polarised SLM output field on the pupil grid, zero outside the stop.
inline ComplexField2D slm_field(const SlmSpec& s, const PupilGrid& g) {
  s.validate();
  if (g.n < 64 || !(g.pitch > 0)) throw ConfigError("pupil grid must be >= 64 samples with pitch > 0");
  const Axis a = g.axis();
  ComplexField2D f(a, a);
  const double stop = std::min(s.stop(), s.pupil_radius);
  for (std::size_t iy = 0; iy < g.n; ++iy) {
    const double y = a.at(iy);
    for (std::size_t ix = 0; ix < g.n; ++ix) {
      const double x = a.at(ix);
      const double r = std::hypot(x, y);
      if (r > stop) continue;
      const double phi_r = (x == 0.0 && y == 0.0) ? 0.0 : std::atan2(y, x);
      double ph = s.l * phi_r + slm_radial_phase(s, r);
      ph = quantise_phase(ph, s.phase_levels);
      f(iy, ix) = s.c0 * std::exp(-(r * r) / (s.w_o * s.w_o)) * std::polar(1.0, ph);
    }
  }
  return f;
}

}  // namespace ponderolens
