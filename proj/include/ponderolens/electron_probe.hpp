#pragma once
#include <cmath>
#include <optional>
#include <vector>

#include "constants.hpp"
#include "grid.hpp"
#include "interpolation.hpp"
#include "kinematics.hpp"
#include "parallel.hpp"
#include "zoom_dft.hpp"

namespace ponderolens {

/// Interaction-plane and Fourier-plane sampling of the probe calculation.
struct ProbeGrid {
  std::size_t ip_n = 512;        ///< samples across 2 w_e
  std::size_t out_n = 129;       ///< odd so the optical axis is a sample
  double out_half = 11e-9;       ///< output half-extent, m

  void validate() const {
    if (ip_n < 16) throw ConfigError("grids.probe_ip_n must be >= 16");
    if (out_n < 3) throw ConfigError("grids.probe_out_n must be >= 3");
    if (!(out_half > 0)) throw ConfigError("grids.probe_out_half_m must be > 0");
  }
  Axis ip_axis(const ElectronBeamParams& b) const {
    return Axis::centered(ip_n, 2.0 * b.w_e / double(ip_n));
  }
  Axis out_axis() const { return Axis::symmetric(out_n, out_half); }
};

/// Equivalent lens focal length mapping interaction-plane radius to angle.
inline double effective_focal_length(const ElectronBeamParams& b) { return b.w_e / b.alpha_max; }

inline PhaseMap aberration_phase(const Axis& ax, const Axis& ay, double E,
                                 const ElectronBeamParams& b) {
  b.validate();
  PhaseMap chi(ax, ay, 0.0);
  const double pref =
      constants::pi / wavelength_of(E) * (b.dz0 + b.Cc * (E - b.E0) / b.E0);
  for (std::size_t iy = 0; iy < ay.n; ++iy)
    for (std::size_t ix = 0; ix < ax.n; ++ix) {
      const double r = std::hypot(ax.at(ix), ay.at(iy));
      if (r > b.w_e) continue;
      const double a = b.alpha_max * r / b.w_e;
      chi(iy, ix) = pref * a * a;
    }
  return chi;
}

/// Top-hat disk of radius w_e with unit total probability.
inline ComplexField2D initial_wavefunction(const Axis& a, const ElectronBeamParams& b) {
  b.validate();
  ComplexField2D psi(a, a);
  std::size_t inside = 0;
  for (std::size_t iy = 0; iy < a.n; ++iy)
    for (std::size_t ix = 0; ix < a.n; ++ix)
      if (std::hypot(a.at(ix), a.at(iy)) <= b.w_e) {
        psi(iy, ix) = 1.0;
        ++inside;
      }
  const double amp = 1.0 / std::sqrt(double(inside) * a.step() * a.step());
  for (auto& v : psi.data) v *= amp;
  return psi;
}

struct ProbeProfile {
  Grid2D<double> I;             ///< unit integral over the output window, 1/m^2
  double pitch = 0;             ///< m
  double captured_fraction = 0; ///< window share of the total probability
  /// Peak probability density at unit beam current, 1/m^2.
  double peak_density() const {
    double m = 0;
    for (double v : I.data) m = std::max(m, v);
    return m * captured_fraction;
  }
};

class ProbeTransform {
 public:
  ProbeTransform(const ElectronBeamParams& b, const ProbeGrid& g)
      : beam_(b), grid_(g), ip_(g.ip_axis(b)), out_(g.out_axis()),
        lf_(wavelength_of(b.E0) * effective_focal_length(b)),
        zt_(ip_, ip_, out_, out_, 1.0 / lf_, -1) {
    g.validate();
  }
  const Axis& ip_axis() const { return ip_; }
  const Axis& out_axis() const { return out_; }
  /// Continuous Fourier transform normalised to preserve total probability.
  ComplexField2D operator()(const ComplexField2D& f) const {
    ComplexField2D o = zt_(f);
    const double s = ip_.step() * ip_.step() / lf_;
    for (auto& v : o.data) v *= s;
    return o;
  }

 private:
  ElectronBeamParams beam_;
  ProbeGrid grid_;
  Axis ip_, out_;
  double lf_;
  ZoomTransform2D zt_;
};

/// Energy-incoherent probe. `phi` must live on the interaction-plane grid.
inline ProbeProfile probe_intensity(const ComplexField2D& psi0, const ElectronBeamParams& b,
                                    const std::vector<EnergySample>& energies,
                                    const PhaseStack* phi, const ProbeGrid& g) {
  ProbeTransform T(b, g);
  require_same_grid(psi0.x, T.ip_axis(), "psi0 vs probe interaction-plane grid");
  if (phi) {
    if (phi->size() != energies.size()) throw MismatchError("phase stack vs energy samples");
    require_same_grid(phi->x, T.ip_axis(), "phase stack vs interaction-plane grid (x)");
    require_same_grid(phi->y, T.ip_axis(), "phase stack vs interaction-plane grid (y)");
    for (std::size_t k = 0; k < energies.size(); ++k)
      if (std::abs(phi->energies[k] - energies[k].E) > 1e-9)
        throw MismatchError("phase stack energies differ from the energy grid");
  }
  const Axis& a = T.ip_axis();
  const Axis o = T.out_axis();
  std::vector<std::vector<double>> parts(energies.size());
  parallel_for(energies.size(), [&](std::size_t k, int) {
    const PhaseMap chi = aberration_phase(a, a, energies[k].E, b);
    ComplexField2D f = psi0;
    for (std::size_t i = 0; i < f.data.size(); ++i) {
      if (f.data[i] == 0.0) continue;
      double ph = chi.data[i];
      if (phi) ph += phi->maps[k].data[i];
      f.data[i] *= std::polar(1.0, ph);
    }
    const ComplexField2D psi = T(f);
    parts[k].resize(psi.data.size());
    for (std::size_t i = 0; i < psi.data.size(); ++i) parts[k][i] = std::norm(psi.data[i]);
  });
  ProbeProfile p;
  p.I = Grid2D<double>(o, o, 0.0);
  p.pitch = o.step();
  for (std::size_t k = 0; k < energies.size(); ++k)
    for (std::size_t i = 0; i < p.I.data.size(); ++i) p.I.data[i] += energies[k].weight * parts[k][i];
  double total = 0;
  for (double v : p.I.data) total += v;
  total *= p.pitch * p.pitch;
  p.captured_fraction = total;
  if (total > 0)
    for (auto& v : p.I.data) v /= total;
  return p;
}

/// Resamples a phase stack onto the interaction-plane grid.
inline PhaseStack resample_stack(const PhaseStack& s, const Axis& ip) {
  PhaseStack o;
  o.x = ip;
  o.y = ip;
  o.energies = s.energies;
  o.maps.resize(s.size());
  parallel_for(s.size(), [&](std::size_t k, int) {
    PhaseMap src(s.x, s.y);
    src.data = s.maps[k].data;
    o.maps[k] = resample_bicubic(src, ip, ip);
  });
  return o;
}

}  // namespace ponderolens
