#pragma once
#include <atomic>
#include <cmath>
#include <map>
#include <vector>

#include "electron_probe.hpp"
#include "kinematics.hpp"
#include "ponderomotive.hpp"
#include "vector_focus.hpp"
#include "zernike.hpp"

namespace ponderolens {

/// How the spread of d^2 phase / dy^2 is summarised.
enum class Moment { central, raw };

/// Spread of the central-difference second y-derivative over |y| <= w_e and all
/// energies. Uses the x = 0 column (nearest sample) of each map.
inline double curvature_stat(const PhaseStack& s, double w_e, Moment mom = Moment::central) {
  const Axis& y = s.y;
  if (y.n < 5) throw DomainError("curvature_stat: need at least 5 y samples");
  std::size_t ix0 = 0;
  for (std::size_t i = 1; i < s.x.n; ++i)
    if (std::abs(s.x.at(i)) < std::abs(s.x.at(ix0))) ix0 = i;
  const double h = y.step(), ih2 = 1.0 / (h * h);
  const double tol = 1e-9 * h;
  double sum = 0, sum2 = 0;
  std::size_t n = 0;
  for (const auto& m : s.maps)
    for (std::size_t j = 1; j + 1 < y.n; ++j) {
      if (std::abs(y.at(j)) > w_e + tol) continue;
      const double d = (m(j + 1, ix0) - 2.0 * m(j, ix0) + m(j - 1, ix0)) * ih2;
      sum += d;
      sum2 += d * d;
      ++n;
    }
  if (n == 0) throw DomainError("curvature_stat: no samples inside the electron spot");
  const double mean = sum / double(n);
  if (mom == Moment::raw) return sum2 / double(n);
  // Two-pass for accuracy.
  double acc = 0;
  for (const auto& m : s.maps)
    for (std::size_t j = 1; j + 1 < y.n; ++j) {
      if (std::abs(y.at(j)) > w_e + tol) continue;
      const double d = (m(j + 1, ix0) - 2.0 * m(j, ix0) + m(j - 1, ix0)) * ih2 - mean;
      acc += d * d;
    }
  return acc / double(n);
}

inline PhaseStack add_stacks(const PhaseStack& a, const PhaseStack& b, double sb = 1.0) {
  if (!(a.x == b.x) || !(a.y == b.y) || a.size() != b.size())
    throw MismatchError("add_stacks: incompatible stacks");
  PhaseStack o = a;
  for (std::size_t k = 0; k < a.size(); ++k)
    for (std::size_t i = 0; i < o.maps[k].data.size(); ++i) o.maps[k].data[i] += sb * b.maps[k].data[i];
  return o;
}

/// Shaping parameters in optimiser units: peak field in GV/m, Zernike weights,
/// defocus in micrometres.
struct ShapeParams {
  double peak_GVm = 0;
  std::map<int, double> weights;
  double dz0_um = 0;
};

/// Static description of the slice problem that the cost rebuilds per call.
struct CostSetup {
  ElectronBeamParams beam;
  LaserParams laser;
  FocusConfig focus;          ///< only lambda, NA, f, z list and matrix form are used
  SlmSpec slm;                ///< l, waist, radii, quantisation; weights and c0 replaced
  std::size_t pupil_n = 256;
  std::size_t line_n = 41;    ///< samples over |y| <= w_e on the x = 0 slice
  Axis survey{81, -20e-6, 20e-6};
  std::vector<EnergySample> energies;
  QuadratureSettings quad;
};

struct SliceEval {
  double c0 = 0;             ///< V/m
  double peak_unit = 0;      ///< survey peak |g| per unit c0
  PhaseStack phi;            ///< ponderomotive phase on the slice
  bool coverage_ok = true;
};

class CostContext {
 public:
  explicit CostContext(CostSetup s)
      : s_(std::move(s)),
        pupil_(PupilGrid::covering(s_.pupil_n, s_.focus.aperture_radius())),
        geo_(pupil_.axis(), s_.focus) {
    s_.beam.validate();
    if (s_.line_n < 5 || s_.line_n % 2 == 0) throw ConfigError("grids.line_n must be odd and >= 5");
    line_ = Axis::symmetric(s_.line_n, s_.beam.w_e);
    ElectronBeamParams b0 = s_.beam;
    b0.dz0 = 0.0;
    chi0_ = chi_stack(b0);
    ElectronBeamParams b1 = b0;
    b1.dz0 = 1e-6;
    PhaseStack c1 = chi_stack(b1);
    chi_um_ = add_stacks(c1, chi0_, -1.0);  // phase per micrometre of defocus
    ++chi_builds_;
    den_central_ = curvature_stat(chi0_, s_.beam.w_e, Moment::central);
    den_raw_ = curvature_stat(chi0_, s_.beam.w_e, Moment::raw);
    if (!(den_central_ > 0)) throw ConfigError("cost: chromatic curvature vanishes (Cc = 0?)");
  }

  const CostSetup& setup() const { return s_; }
  const Axis& line_axis() const { return line_; }
  const PhaseStack& chi0() const { return chi0_; }
  int chi_builds() const { return chi_builds_; }
  long evaluations() const { return evals_.load(); }

  /// chi(dz0) on the slice from the cached pieces (chi is linear in dz0).
  PhaseStack chi_at(double dz0_um) const { return add_stacks(chi0_, chi_um_, dz0_um); }

  SlmSpec slm_for(const ShapeParams& p, double c0) const {
    SlmSpec s = s_.slm;
    s.zernike_weights = p.weights;
    s.c0 = c0;
    return s;
  }

  SliceEval slice(const ShapeParams& p) const {
    ++evals_;
    SliceEval r;
    const auto Ei = slm_field(slm_for(p, 1.0), pupil_);
    const auto lf = axis_line_fields(geo_, Ei, s_.focus.out_z, {line_, s_.survey}, true);
    r.peak_unit = line_peak_field(lf[1]);
    r.c0 = r.peak_unit > 0 ? p.peak_GVm * 1e9 / r.peak_unit : 0.0;
    const double g0 = gamma_of(s_.beam.E0);
    ScalarFieldStack3D S{Axis{1, 0, 0}, line_, s_.focus.out_z, g0, {}};
    S.S.resize(S.z.size() * line_.n);
    const double c2 = r.c0 * r.c0;
    for (std::size_t iz = 0; iz < S.z.size(); ++iz)
      for (std::size_t i = 0; i < line_.n; ++i) S.S[iz * line_.n + i] = c2 * lf[0].S_along_y(iz, i, g0);
    auto ph = ponder_phase_map(S, s_.laser, s_.beam, s_.energies, s_.quad);
    r.phi = std::move(ph.stack);
    r.coverage_ok = ph.coverage_ok;
    return r;
  }

  /// Ratio of chromatic curvature spread with and without the light.
  double cost(const ShapeParams& p) const {
    const SliceEval e = slice(p);
    return curvature_stat(add_stacks(chi0_, e.phi), s_.beam.w_e, Moment::central) / den_central_;
  }

  /// Defocus-aware variant. The numerator uses the second moment about zero:
  /// a central spread would not see an energy-independent defocus at all.
  double cost2(const ShapeParams& p) const {
    const PhaseStack tot = add_stacks(chi_at(p.dz0_um), slice(p).phi);
    return curvature_stat(tot, s_.beam.w_e, Moment::raw) / den_raw_;
  }

  /// Defocus that zeroes the mean slice curvature for a given phase.
  double self_consistent_dz0_um(const PhaseStack& phi) const {
    // Mean second difference is linear in dz0: solve directly.
    auto mean_d2 = [&](const PhaseStack& st) {
      double sum = 0;
      std::size_t n = 0;
      const std::size_t ix0 = 0;
      const double h = st.y.step();
      for (const auto& m : st.maps)
        for (std::size_t j = 1; j + 1 < st.y.n; ++j) {
          if (std::abs(st.y.at(j)) > s_.beam.w_e * (1 + 1e-9)) continue;
          sum += (m(j + 1, ix0) - 2 * m(j, ix0) + m(j - 1, ix0)) / (h * h);
          ++n;
        }
      return sum / double(n);
    };
    const double base = mean_d2(add_stacks(chi0_, phi));
    const double unit = mean_d2(chi_um_);
    return -base / unit;
  }

 private:
  PhaseStack chi_stack(const ElectronBeamParams& b) const {
    PhaseStack st;
    st.x = Axis{1, 0, 0};
    st.y = line_;
    for (auto& e : s_.energies) {
      st.energies.push_back(e.E);
      st.maps.push_back(aberration_phase(st.x, st.y, e.E, b));
    }
    return st;
  }

  CostSetup s_;
  PupilGrid pupil_;
  PupilGeometry geo_;
  Axis line_;
  PhaseStack chi0_, chi_um_;
  double den_central_ = 0, den_raw_ = 0;
  int chi_builds_ = 0;
  mutable std::atomic<long> evals_{0};
};

}  // namespace ponderolens
