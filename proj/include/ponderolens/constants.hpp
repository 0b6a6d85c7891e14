#pragma once
#include <numbers>

/// CODATA 2018 constants in SI units.
namespace ponderolens::constants {

inline constexpr double pi = std::numbers::pi;
inline constexpr double c = 299792458.0;                 // m/s
inline constexpr double e = 1.602176634e-19;             // C
inline constexpr double m_e = 9.1093837015e-31;          // kg
inline constexpr double hbar = 1.054571817e-34;          // J s
inline constexpr double eps0 = 8.8541878128e-12;         // F/m
inline constexpr double E_r0_eV = 510998.95;             // electron rest energy, eV

/// FWHM to standard deviation for a Gaussian.
inline constexpr double fwhm_to_sigma = 0.42466090014400953;  // 1/sqrt(8 ln 2)

}  // namespace ponderolens::constants
