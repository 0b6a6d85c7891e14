#pragma once
#include <cmath>
#include <vector>

#include "constants.hpp"
#include "errors.hpp"
#include "grid.hpp"
#include "interpolation.hpp"
#include "kinematics.hpp"
#include "parallel.hpp"
#include "vector_focus.hpp"

namespace ponderolens {

struct LaserParams {
  double lambda_o = 2060e-9;
  double tau_0 = 250e-15;  ///< intensity FWHM
  double t_0 = 0.0;

  double sigma_t() const { return tau_0 / (2.0 * std::sqrt(std::log(2.0))); }
  double omega() const { return 2.0 * constants::pi * constants::c / lambda_o; }
  void validate() const {
    if (!(lambda_o > 0)) throw ConfigError("laser.lambda_m must be > 0");
    if (!(tau_0 > 0)) throw ConfigError("laser.tau0_s must be > 0");
  }
};

struct QuadratureSettings {
  double steps_per_sigma = 64;   ///< time step sigma_t/(steps*(1+beta))
  double envelope_cut = 1e-6;    ///< window where the envelope exceeds this
};

/// Collapses the time integral for one energy onto weights over the z nodes,
/// so phi(x,y) = -K * sum_iz W[iz] S(x, y, z_iz).
struct ZWeights {
  std::vector<double> W;
  double step = 0, half_window = 0, t_center = 0;
  std::size_t n_steps = 0;
  bool coverage_ok = true;
};

inline ZWeights time_weights(const std::vector<double>& z_nodes, double z0p, double v,
                             const LaserParams& laser, const QuadratureSettings& q = {}) {
  const double beta = v / constants::c, st = laser.sigma_t();
  ZWeights r;
  r.W.assign(z_nodes.size(), 0.0);
  // Envelope argument ((1+beta) t - t0 + z0p/c) / sigma_t.
  r.t_center = (laser.t_0 - z0p / constants::c) / (1.0 + beta);
  r.half_window = st * std::sqrt(-std::log(q.envelope_cut)) / (1.0 + beta);
  r.step = st / (q.steps_per_sigma * (1.0 + beta));
  const long N = long(std::ceil(r.half_window / r.step));
  r.n_steps = std::size_t(2 * N + 1);
  Stencil4 s;
  for (long j = -N; j <= N; ++j) {
    const double t = r.t_center + double(j) * r.step;
    const double u = ((1.0 + beta) * t - laser.t_0 + z0p / constants::c) / st;
    const double tw = (j == -N || j == N) ? 0.5 * r.step : r.step;
    const double env = std::exp(-u * u) * tw;
    const double z = z0p + v * t;
    if (!lagrange_stencil(z_nodes, z, s)) {
      r.coverage_ok = false;
      continue;
    }
    for (int a = 0; a < s.count; ++a) r.W[s.first + a] += env * s.w[a];
  }
  return r;
}

/// Prefactor e^2 / (4 m_e gamma hbar omega^2).
inline double ponder_prefactor(double E, const LaserParams& laser) {
  using namespace constants;
  const double w = laser.omega();
  return e * e / (4.0 * m_e * gamma_of(E) * hbar * w * w);
}

struct PhaseMeta {
  double step = 0, half_window = 0;
  bool coverage_ok = true;
};

inline PhaseMap apply_weights(const ScalarFieldStack3D& S, const ZWeights& zw, double K) {
  PhaseMap m(S.x, S.y, 0.0);
  const std::size_t plane = S.nx() * S.ny();
  for (std::size_t iz = 0; iz < S.nz(); ++iz) {
    const double w = zw.W[iz];
    if (w == 0.0) continue;
    const double* src = &S.S[iz * plane];
    for (std::size_t i = 0; i < plane; ++i) m.data[i] += w * src[i];
  }
  for (auto& v : m.data) v *= -K;
  return m;
}

inline PhaseMap ponder_phase_single(const ScalarFieldStack3D& S, const LaserParams& laser,
                                    const ElectronBeamParams& beam, double E, double z0p,
                                    PhaseMeta* meta = nullptr, const QuadratureSettings& q = {}) {
  laser.validate();
  beam.validate();
  const ZWeights zw = time_weights(S.z, z0p, velocity_of(E), laser, q);
  if (meta) *meta = {zw.step, zw.half_window, zw.coverage_ok};
  return apply_weights(S, zw, ponder_prefactor(E, laser));
}

struct PhaseStackResult {
  PhaseStack stack;
  std::vector<PhaseMeta> meta;
  bool coverage_ok = true;
};

inline PhaseStackResult ponder_phase_map(const ScalarFieldStack3D& S, const LaserParams& laser,
                                         const ElectronBeamParams& beam,
                                         const std::vector<EnergySample>& energies,
                                         const QuadratureSettings& q = {}) {
  PhaseStackResult r;
  r.stack.x = S.x;
  r.stack.y = S.y;
  r.stack.maps.resize(energies.size());
  r.meta.resize(energies.size());
  for (auto& e : energies) r.stack.energies.push_back(e.E);
  parallel_for(energies.size(), [&](std::size_t k, int) {
    r.stack.maps[k] =
        ponder_phase_single(S, laser, beam, energies[k].E, energies[k].z0p, &r.meta[k], q);
  });
  for (auto& m : r.meta) r.coverage_ok = r.coverage_ok && m.coverage_ok;
  return r;
}

struct LinearPhaseResult {
  PhaseStack stack;
  double offset = 0;        ///< rad
  double slope = 0;         ///< rad/eV
  double total_change = 0;  ///< slope times the energy window, rad
  double energy_shift = 0;  ///< eV
};

/// Fits a + b (E - E0) to the near-axis mean phase and subtracts it everywhere.
inline LinearPhaseResult remove_linear_energy_phase(const PhaseStack& in,
                                                    const ElectronBeamParams& beam) {
  if (in.size() < 3) throw DomainError("remove_linear_energy_phase: need >= 3 energy samples");
  const double rmax = 0.1 * beam.w_e;
  std::vector<std::size_t> sel;
  double best = INFINITY;
  std::size_t nearest = 0;
  for (std::size_t iy = 0; iy < in.y.n; ++iy)
    for (std::size_t ix = 0; ix < in.x.n; ++ix) {
      const double r = std::hypot(in.x.at(ix), in.y.at(iy));
      if (r <= rmax) sel.push_back(iy * in.x.n + ix);
      if (r < best) best = r, nearest = iy * in.x.n + ix;
    }
  if (sel.empty()) sel.push_back(nearest);
  const std::size_t n = in.size();
  std::vector<double> u(n), a(n);
  for (std::size_t k = 0; k < n; ++k) {
    u[k] = in.energies[k] - beam.E0;
    double s = 0;
    for (auto i : sel) s += in.maps[k].data[i];
    a[k] = s / double(sel.size());
  }
  double mu = 0, ma = 0;
  for (std::size_t k = 0; k < n; ++k) mu += u[k], ma += a[k];
  mu /= double(n);
  ma /= double(n);
  double sxx = 0, sxy = 0;
  for (std::size_t k = 0; k < n; ++k) sxx += (u[k] - mu) * (u[k] - mu), sxy += (u[k] - mu) * (a[k] - ma);
  LinearPhaseResult r;
  r.slope = sxx > 0 ? sxy / sxx : 0.0;
  r.offset = ma - r.slope * mu;
  r.total_change = r.slope * (in.energies.back() - in.energies.front());
  // Chirp inversion t(E) = z0'(E)/v0 gives dE/dt = 2 dE / tau_e.
  const double dEdt = 2.0 * beam.dE / beam.tau_e;
  r.energy_shift = constants::hbar * r.slope * dEdt / constants::e;
  r.stack = in;
  for (std::size_t k = 0; k < n; ++k) {
    const double sub = r.offset + r.slope * u[k];
    for (auto& v : r.stack.maps[k].data) v -= sub;
  }
  return r;
}

}  // namespace ponderolens
