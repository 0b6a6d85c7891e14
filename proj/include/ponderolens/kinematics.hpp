#pragma once
#include <cmath>
#include <string>
#include <vector>

#include "constants.hpp"
#include "errors.hpp"

namespace ponderolens {

/// Electron-side parameters. Energies in eV, lengths in m, times in s.
struct ElectronBeamParams {
  double E0 = 1000.0;
  double dE = 0.5;          ///< FWHM energy spread
  double Cc = 8e-3;
  double alpha_max = 8e-3;
  double w_e = 2e-6;
  double tau_e = 1200e-15;
  double dz0 = 0.0;

  void validate() const {
    if (!(E0 > 0)) throw ConfigError("beam.E0_eV must be > 0");
    if (!(dE > 0)) throw ConfigError("beam.dE_eV must be > 0");
    if (!(alpha_max > 0)) throw ConfigError("beam.alpha_max_rad must be > 0");
    if (!(w_e > 0)) throw ConfigError("beam.w_e_m must be > 0");
    if (!(tau_e > 0)) throw ConfigError("beam.tau_e_s must be > 0");
    if (!(Cc >= 0)) throw ConfigError("beam.Cc_m must be >= 0");
  }
};

struct Kinematics {
  double gamma;
  double v_e;
  double lambda_e;
  double sigma_E;  ///< only meaningful when built with a spread; NaN otherwise
};

inline double gamma_of(double E) { return 1.0 + E / constants::E_r0_eV; }

inline double velocity_of(double E) {
  const double g = gamma_of(E);
  return constants::c * std::sqrt(1.0 - 1.0 / (g * g));
}

inline double wavelength_of(double E) {
  using namespace constants;
  // hc in eV m over the momentum term in eV.
  return 2.0 * pi * hbar * c / e / std::sqrt(2.0 * E * E_r0_eV + E * E);
}

inline Kinematics relativistic_kinematics(double E, double dE_fwhm = NAN) {
  if (!(E > 0) || !std::isfinite(E)) throw DomainError("relativistic_kinematics: E must be > 0");
  return {gamma_of(E), velocity_of(E), wavelength_of(E), dE_fwhm * constants::fwhm_to_sigma};
}

inline double sigma_E(const ElectronBeamParams& b) { return b.dE * constants::fwhm_to_sigma; }

/// How v0 enters the chirp map. The exact value is the default; 0.06c is the rounded figure.
enum class V0Mode { exact, rounded };

inline double chirp_v0(const ElectronBeamParams& b, V0Mode mode = V0Mode::exact) {
  return mode == V0Mode::exact ? velocity_of(b.E0) : 0.06 * constants::c;
}

inline double chirp_position(double E, const ElectronBeamParams& b, V0Mode mode = V0Mode::exact) {
  b.validate();
  return (E - b.E0) * b.tau_e * chirp_v0(b, mode) / (2.0 * b.dE);
}

struct EnergySample {
  double E;
  double weight;
  double z0p;
};

inline std::vector<EnergySample> energy_grid(const ElectronBeamParams& b, int n_samples = 41,
                                             double span_sigmas = 3.0,
                                             V0Mode mode = V0Mode::exact) {
  b.validate();
  if (n_samples < 3 || n_samples % 2 == 0)
    throw ConfigError("energy_grid: n_samples must be odd and >= 3, got " +
                      std::to_string(n_samples));
  if (!(span_sigmas > 0)) throw ConfigError("energy_grid: span_sigmas must be > 0");
  const double s = sigma_E(b);
  const int half = n_samples / 2;
  std::vector<EnergySample> out(n_samples);
  // Symmetric construction keeps weights exactly mirrored about E0.
  double total = 0;
  for (int i = 0; i < n_samples; ++i) {
    const double u = span_sigmas * double(i - half) / double(half);
    out[i].E = b.E0 + u * s;
    out[i].weight = std::exp(-0.5 * u * u);
    out[i].z0p = u * s * b.tau_e * chirp_v0(b, mode) / (2.0 * b.dE);
    total += out[i].weight;
  }
  for (auto& x : out) x.weight /= total;
  return out;
}

}  // namespace ponderolens
