#pragma once
#include <optional>
#include <string>
#include <vector>

#include "config.hpp"
#include "cost.hpp"
#include "electron_probe.hpp"
#include "metrics.hpp"
#include "optimizer.hpp"
#include "ponderomotive.hpp"
#include "vector_focus.hpp"
#include "zernike.hpp"

namespace ponderolens {

/// SLM field with its amplitude fixed by the configured peak focal field.
struct CalibratedPupil {
  SlmSpec slm;
  ComplexField2D Ei;
  double peak_unit = 0;   ///< survey peak |g| for c0 = 1
  double peak_field = 0;  ///< V/m, survey peak after scaling
  double pulse_energy = 0;
};

inline CalibratedPupil calibrate_pupil(const RunConfig& cfg, std::size_t pupil_n) {
  const FocusConfig fc = cfg.focus_config();
  CalibratedPupil r;
  r.slm = cfg.slm_spec();
  const PupilGrid pg = PupilGrid::covering(pupil_n, fc.aperture_radius());
  r.Ei = slm_field(r.slm, pg);
  PupilGeometry geo(pg.axis(), fc);
  const Axis survey = Axis::symmetric(cfg.grids.survey_n, cfg.grids.survey_half);
  r.peak_unit = line_peak_field(axis_line_fields(geo, r.Ei, fc.out_z, {survey}, true)[0]);
  double c0 = cfg.slm.c0;
  if (cfg.slm.peak_field > 0) c0 = r.peak_unit > 0 ? cfg.slm.peak_field / r.peak_unit : 0.0;
  r.slm.c0 = c0;
  for (auto& v : r.Ei.data) v *= c0;
  r.peak_field = c0 * r.peak_unit;
  r.pulse_energy = pulse_energy(r.Ei, cfg.laser.sigma_t());
  return r;
}

struct FocusResult {
  CalibratedPupil pupil;
  ScalarFieldStack3D S;
  double gamma0 = 1;
};

inline FocusResult run_focus(const RunConfig& cfg) {
  FocusResult r;
  r.pupil = calibrate_pupil(cfg, cfg.grids.pupil_n);
  r.gamma0 = gamma_of(cfg.beam.E0);
  r.S = intensity_stack(r.pupil.Ei, cfg.focus_config(), r.gamma0);
  return r;
}

struct PhaseResult {
  PhaseStackResult raw;
  LinearPhaseResult linear;
};

inline PhaseResult run_phase(const RunConfig& cfg, const ScalarFieldStack3D& S) {
  PhaseResult r;
  r.raw = ponder_phase_map(S, cfg.laser, cfg.beam, cfg.energies(), cfg.grids.quad);
  r.linear = remove_linear_energy_phase(r.raw.stack, cfg.beam);
  return r;
}

/// Probe with optional light phase given on the focal grid.
inline ProbeProfile run_probe(const RunConfig& cfg, const PhaseStack* phi_focal) {
  ProbeTransform T(cfg.beam, cfg.grids.probe);
  const ComplexField2D psi0 = initial_wavefunction(T.ip_axis(), cfg.beam);
  if (!phi_focal) return probe_intensity(psi0, cfg.beam, cfg.energies(), nullptr, cfg.grids.probe);
  const PhaseStack ip = resample_stack(*phi_focal, T.ip_axis());
  return probe_intensity(psi0, cfg.beam, cfg.energies(), &ip, cfg.grids.probe);
}

/// Ideal spot: no chromatic blur, no defocus, no light.
inline ProbeProfile run_target(const RunConfig& cfg) {
  RunConfig t = cfg;
  t.beam.Cc = 0.0;
  t.beam.dz0 = 0.0;
  return run_probe(t, nullptr);
}

inline MetricsReport run_metrics(const RunConfig& cfg, const ProbeProfile& I,
                                 const ProbeProfile& target, CcFit* fit_out = nullptr) {
  MetricsReport m;
  m.sigma_nm = profile_sigma(I);
  m.peak_ratio = peak_ratio(I, target);
  const CcFit fit = effective_cc(I, cfg.beam, cfg.energies(), cfg.grids.probe,
                                 logspace(cfg.metrics.cc_min, cfg.metrics.cc_max, cfg.metrics.cc_n),
                                 cfg.metrics.similarity);
  m.cc_eff = fit.cc;
  m.cc_at_boundary = fit.at_boundary;
  m.improvement_factor = fit.cc > 0 ? cfg.beam.Cc / fit.cc : INFINITY;
  m.contrast = peak_contrast(I.I, cfg.metrics.contrast_r1, cfg.metrics.contrast_r2);
  if (fit_out) *fit_out = fit;
  return m;
}

inline CostSetup make_cost_setup(const RunConfig& cfg, std::optional<std::size_t> pupil_n = {}) {
  CostSetup s;
  s.beam = cfg.beam;
  s.laser = cfg.laser;
  s.focus = cfg.focus_config();
  s.slm = cfg.slm_spec();
  s.pupil_n = pupil_n.value_or(cfg.grids.optimizer_pupil_n);
  s.line_n = cfg.grids.line_n;
  s.survey = Axis::symmetric(cfg.grids.survey_n, cfg.grids.survey_half);
  s.energies = cfg.energies();
  s.quad = cfg.grids.quad;
  return s;
}

/// Zernike orders the optimiser controls: the configured ones, else 2..8.
inline std::vector<int> shaping_orders(const RunConfig& cfg) {
  std::vector<int> o;
  for (auto& [n, w] : cfg.slm.zernike) o.push_back(n);
  if (o.empty()) o = {2, 4, 6, 8};
  return o;
}

/// Vector layout [peak_GVm, c_n..., (dz0_um)].
inline ShapeParams unpack_params(const std::vector<double>& v, const std::vector<int>& orders,
                                 bool defocus) {
  ShapeParams p;
  p.peak_GVm = v.at(0);
  for (std::size_t i = 0; i < orders.size(); ++i) p.weights[orders[i]] = v.at(1 + i);
  p.dz0_um = defocus ? v.at(1 + orders.size()) : 0.0;
  return p;
}

inline ShapeParams config_params(const RunConfig& cfg) {
  ShapeParams p;
  p.peak_GVm = cfg.slm.peak_field * 1e-9;
  p.weights = cfg.slm.zernike;
  p.dz0_um = cfg.beam.dz0 * 1e6;
  return p;
}

struct OptimizeResult {
  OptResult opt;
  ShapeParams best;
  RunConfig tuned;          ///< input config with the optimum applied
  double start_cost = 0;    ///< objective at the configured parameters
  std::vector<int> orders;
  int chi_builds = 0;
};

inline OptimizeResult run_optimize(const RunConfig& cfg) {
  OptimizeResult r;
  const CostContext ctx(make_cost_setup(cfg));
  r.orders = shaping_orders(cfg);
  const bool dz = cfg.optimizer.cfg.optimize_defocus;
  OptimizerConfig oc = cfg.optimizer.cfg;
  oc.init_ranges.clear();
  oc.init_ranges.push_back(cfg.optimizer.init.peak_GVm);
  for (std::size_t i = 0; i < r.orders.size(); ++i) oc.init_ranges.push_back(cfg.optimizer.init.zernike);
  if (dz) oc.init_ranges.push_back(cfg.optimizer.init.dz0_um);
  auto f = [&](const std::vector<double>& v) {
    const ShapeParams p = unpack_params(v, r.orders, dz);
    return dz ? ctx.cost2(p) : ctx.cost(p);
  };
  const ShapeParams start = config_params(cfg);
  r.start_cost = dz ? ctx.cost2(start) : ctx.cost(start);
  r.opt = optimize(oc, f, derive_seed(cfg.seed, "optimize"));
  r.best = unpack_params(r.opt.best_params, r.orders, dz);
  r.tuned = cfg;
  r.tuned.slm.zernike = r.best.weights;
  r.tuned.slm.peak_field = r.best.peak_GVm * 1e9;
  r.tuned.slm.c0 = 0;
  if (dz) r.tuned.beam.dz0 = r.best.dz0_um * 1e-6;
  r.chi_builds = ctx.chi_builds();
  return r;
}

}  // namespace ponderolens
