#pragma once
#include <algorithm>
#include <cmath>
#include <vector>

#include "electron_probe.hpp"
#include "errors.hpp"

namespace ponderolens {

struct Centroid {
  double x, y;
};

inline Centroid centroid(const Grid2D<double>& I) {
  double s = 0, sx = 0, sy = 0;
  for (std::size_t iy = 0; iy < I.ny(); ++iy)
    for (std::size_t ix = 0; ix < I.nx(); ++ix) {
      const double v = I(iy, ix);
      s += v;
      sx += v * I.x.at(ix);
      sy += v * I.y.at(iy);
    }
  if (!(s > 0)) throw DomainError("profile is identically zero");
  return {sx / s, sy / s};
}

/// Radial standard deviation about the centroid, in nm.
inline double profile_sigma(const Grid2D<double>& I) {
  const Centroid c = centroid(I);
  double s = 0, s2 = 0;
  for (std::size_t iy = 0; iy < I.ny(); ++iy)
    for (std::size_t ix = 0; ix < I.nx(); ++ix) {
      const double dx = I.x.at(ix) - c.x, dy = I.y.at(iy) - c.y, v = I(iy, ix);
      s += v;
      s2 += v * (dx * dx + dy * dy);
    }
  return std::sqrt(s2 / s) * 1e9;
}
inline double profile_sigma(const ProbeProfile& p) { return profile_sigma(p.I); }

/// Peak probability density relative to the target at equal beam current.
inline double peak_ratio(const ProbeProfile& I, const ProbeProfile& target) {
  if (std::abs(I.pitch - target.pitch) > 1e-12 * target.pitch || !I.I.same_grid(target.I))
    throw ConfigError("peak_ratio: profiles use different pitches or grids");
  return I.peak_density() / target.peak_density();
}

/// Mean intensity in pitch-wide annuli about the centroid, out to the
/// largest complete ring inside the window.
struct RadialProfile {
  std::vector<double> r;  ///< m
  std::vector<double> I;
};

inline RadialProfile radial_profile(const Grid2D<double>& I) {
  const Centroid c = centroid(I);
  const double p = I.x.step();
  const double rmax = std::min({I.x.max - c.x, c.x - I.x.min, I.y.max - c.y, c.y - I.y.min});
  const std::size_t nb = std::size_t(std::floor(rmax / p)) + 1;
  std::vector<double> sum(nb, 0.0), cnt(nb, 0.0);
  for (std::size_t iy = 0; iy < I.ny(); ++iy)
    for (std::size_t ix = 0; ix < I.nx(); ++ix) {
      const double r = std::hypot(I.x.at(ix) - c.x, I.y.at(iy) - c.y);
      const std::size_t k = std::size_t(std::floor(r / p + 0.5));
      if (k >= nb) continue;
      sum[k] += I(iy, ix);
      cnt[k] += 1;
    }
  RadialProfile rp;
  for (std::size_t k = 0; k < nb; ++k)
    if (cnt[k] > 0) {
      rp.r.push_back(double(k) * p);
      rp.I.push_back(sum[k] / cnt[k]);
    }
  return rp;
}

/// Radial profile of the probability density normalised over the whole plane.
inline RadialProfile density_profile(const ProbeProfile& p) {
  RadialProfile rp = radial_profile(p.I);
  for (auto& v : rp.I) v *= p.captured_fraction;
  return rp;
}

enum class Similarity { l2, ncc };

inline double profile_distance(const RadialProfile& a, const RadialProfile& b, Similarity s) {
  const std::size_t n = std::min(a.I.size(), b.I.size());
  if (s == Similarity::l2) {
    double d = 0;
    for (std::size_t k = 0; k < n; ++k) d += (a.I[k] - b.I[k]) * (a.I[k] - b.I[k]);
    return std::sqrt(d);
  }
  double ma = 0, mb = 0;
  for (std::size_t k = 0; k < n; ++k) ma += a.I[k], mb += b.I[k];
  ma /= double(n);
  mb /= double(n);
  double sab = 0, saa = 0, sbb = 0;
  for (std::size_t k = 0; k < n; ++k) {
    sab += (a.I[k] - ma) * (b.I[k] - mb);
    saa += (a.I[k] - ma) * (a.I[k] - ma);
    sbb += (b.I[k] - mb) * (b.I[k] - mb);
  }
  return 1.0 - sab / std::sqrt(saa * sbb);
}

inline std::vector<double> logspace(double a, double b, std::size_t n) {
  std::vector<double> v(n);
  for (std::size_t i = 0; i < n; ++i)
    v[i] = std::exp(std::log(a) + (std::log(b) - std::log(a)) * double(i) / double(n - 1));
  return v;
}

struct CcFit {
  double cc = 0;
  bool at_boundary = false;
  std::vector<double> scan, distance;
};

/// Chromatic coefficient of the light-free lens whose spot best matches `I`.
inline CcFit effective_cc(const ProbeProfile& I, const ElectronBeamParams& beam,
                          const std::vector<EnergySample>& energies, const ProbeGrid& grid,
                          const std::vector<double>& scan, Similarity sim = Similarity::l2) {
  if (scan.size() < 3) throw ConfigError("effective_cc: scan needs >= 3 values");
  const RadialProfile target = density_profile(I);
  CcFit fit;
  fit.scan = scan;
  fit.distance.assign(scan.size(), 0.0);
  ProbeTransform T(beam, grid);
  const ComplexField2D psi0 = initial_wavefunction(T.ip_axis(), beam);
  parallel_for(scan.size(), [&](std::size_t i, int) {
    ElectronBeamParams b = beam;
    b.Cc = scan[i];
    b.dz0 = 0.0;
    const ProbeProfile p = probe_intensity(psi0, b, energies, nullptr, grid);
    fit.distance[i] = profile_distance(density_profile(p), target, sim);
  });
  const std::size_t k =
      std::min_element(fit.distance.begin(), fit.distance.end()) - fit.distance.begin();
  if (k == 0 || k + 1 == scan.size()) {
    fit.at_boundary = true;
    fit.cc = scan[k];
    return fit;
  }
  // Parabola through the three neighbours in log(Cc).
  const double x0 = std::log(scan[k - 1]), x1 = std::log(scan[k]), x2 = std::log(scan[k + 1]);
  const double y0 = fit.distance[k - 1], y1 = fit.distance[k], y2 = fit.distance[k + 1];
  const double den = (x0 - x1) * (x0 - x2) * (x1 - x2);
  const double A = (x2 * (y1 - y0) + x1 * (y0 - y2) + x0 * (y2 - y1)) / den;
  const double B = (x2 * x2 * (y0 - y1) + x1 * x1 * (y2 - y0) + x0 * x0 * (y1 - y2)) / den;
  double xv = A > 0 ? -B / (2 * A) : x1;
  xv = std::clamp(xv, x0, x2);
  fit.cc = std::exp(xv);
  return fit;
}

/// Peak over the median of an annulus [r1, r2] about the centroid. Informational.
inline double peak_contrast(const Grid2D<double>& I, double r1, double r2) {
  const Centroid c = centroid(I);
  std::vector<double> ring;
  double peak = 0;
  for (std::size_t iy = 0; iy < I.ny(); ++iy)
    for (std::size_t ix = 0; ix < I.nx(); ++ix) {
      peak = std::max(peak, I(iy, ix));
      const double r = std::hypot(I.x.at(ix) - c.x, I.y.at(iy) - c.y);
      if (r >= r1 && r <= r2) ring.push_back(I(iy, ix));
    }
  if (ring.empty()) return 0.0;
  std::nth_element(ring.begin(), ring.begin() + ring.size() / 2, ring.end());
  const double med = ring[ring.size() / 2];
  return med > 0 ? peak / med : INFINITY;
}

struct MetricsReport {
  double sigma_nm = 0;
  double peak_ratio = 0;
  double cc_eff = 0;
  double improvement_factor = 0;
  bool cc_at_boundary = false;
  double contrast = 0;
};

}  // namespace ponderolens
