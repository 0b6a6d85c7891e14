#pragma once
// Subcommand implementations shared by the CLI entry point.
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <ponderolens/ponderolens.hpp>

namespace ponderolens::cli {

namespace fs = std::filesystem;
inline constexpr const char* version = "0.1.0";

struct Options {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> output;
  std::optional<std::string> input;
  int threads = 1;
  bool dry_run = false;
};

/// Tracks written files and per-stage wall time.
class Run {
 public:
  Run(RunConfig cfg) : cfg_(std::move(cfg)) {
    dir_ = cfg_.output_dir;
    std::error_code ec;
    fs::create_directories(dir_, ec);
    if (ec) throw IoError("cannot create output directory " + dir_.string() + ": " + ec.message());
  }
  const RunConfig& cfg() const { return cfg_; }
  RunConfig& cfg() { return cfg_; }
  fs::path path(const std::string& name) const { return dir_ / name; }

  void wrote(const std::string& name) { files_.push_back(name); }
  const std::vector<std::string>& files() const { return files_; }

  template <class F>
  auto stage(const std::string& name, F&& f) {
    const auto t0 = std::chrono::steady_clock::now();
    std::cerr << "[" << name << "] running\n";
    if constexpr (std::is_void_v<decltype(f())>) {
      f();
      timings_[name] = secs(t0);
    } else {
      auto r = f();
      timings_[name] = secs(t0);
      return r;
    }
  }
  const json& timings() const { return timings_; }

  void write_json(const std::string& name, const json& j) {
    std::ofstream o(path(name));
    if (!o) throw IoError("cannot write " + path(name).string());
    o << j.dump(2) << "\n";
    if (!o) throw IoError("write failed: " + path(name).string());
    wrote(name);
  }
  void write_text(const std::string& name, const std::string& s) {
    std::ofstream o(path(name));
    if (!o) throw IoError("cannot write " + path(name).string());
    o << s;
    if (!o) throw IoError("write failed: " + path(name).string());
    wrote(name);
  }
  void write_grid(const std::string& name, const GridFile& g) {
    write_grid_file(path(name).string(), g);
    wrote(name);
  }

 private:
  static double secs(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  }
  RunConfig cfg_;
  fs::path dir_;
  std::vector<std::string> files_;
  json timings_ = json::object();
};

inline std::string num(double v) {
  char b[32];
  std::snprintf(b, sizeof b, "%.12g", v);
  return b;
}

// ---- grid conversions -------------------------------------------------------

inline GridFile stack_to_grid(const ScalarFieldStack3D& s) {
  GridFile g;
  g.dims = {s.nz(), s.ny(), s.nx()};
  g.axis_min = {s.z.front(), s.y.min, s.x.min};
  g.axis_max = {s.z.back(), s.y.max, s.x.max};
  g.real = s.S;
  return g;
}

inline ScalarFieldStack3D grid_to_stack(const GridFile& g, double gamma0) {
  if (g.dtype != DType::f64 || g.dims.size() != 3) throw MismatchError("expected a rank-3 real S stack");
  ScalarFieldStack3D s;
  s.z = linspace(g.axis_min[0], g.axis_max[0], g.dims[0]);
  s.y = {g.dims[1], g.axis_min[1], g.axis_max[1]};
  s.x = {g.dims[2], g.axis_min[2], g.axis_max[2]};
  s.gamma0 = gamma0;
  s.S = g.real;
  return s;
}

inline GridFile phase_to_grid(const PhaseStack& p) {
  if (p.size() == 0) throw MismatchError("empty phase stack");
  GridFile g;
  g.dims = {p.size(), p.y.n, p.x.n};
  g.axis_min = {p.energies.front(), p.y.min, p.x.min};
  g.axis_max = {p.energies.back(), p.y.max, p.x.max};
  for (auto& m : p.maps) g.real.insert(g.real.end(), m.data.begin(), m.data.end());
  return g;
}

inline PhaseStack grid_to_phase(const GridFile& g) {
  if (g.dtype != DType::f64 || g.dims.size() != 3) throw MismatchError("expected a rank-3 real phase stack");
  PhaseStack p;
  p.energies = linspace(g.axis_min[0], g.axis_max[0], g.dims[0]);
  p.y = {g.dims[1], g.axis_min[1], g.axis_max[1]};
  p.x = {g.dims[2], g.axis_min[2], g.axis_max[2]};
  const std::size_t plane = p.x.n * p.y.n;
  for (std::size_t k = 0; k < g.dims[0]; ++k) {
    PhaseMap m(p.x, p.y);
    std::copy(g.real.begin() + k * plane, g.real.begin() + (k + 1) * plane, m.data.begin());
    p.maps.push_back(std::move(m));
  }
  return p;
}

inline GridFile profile_to_grid(const ProbeProfile& p) {
  GridFile g;
  g.dims = {p.I.ny(), p.I.nx()};
  g.axis_min = {p.I.y.min, p.I.x.min};
  g.axis_max = {p.I.y.max, p.I.x.max};
  g.real = p.I.data;
  return g;
}

// ---- stages -----------------------------------------------------------------

inline json focus_summary(const RunConfig& c, const CalibratedPupil& p) {
  return {{"peak_field_V_per_m", p.peak_field},
          {"c0_V_per_m", p.slm.c0},
          {"peak_per_unit_c0", p.peak_unit},
          {"pulse_energy_J", p.pulse_energy},
          {"w_o_m", p.slm.w_o},
          {"pupil_radius_m", p.slm.pupil_radius},
          {"aperture_radius_m", p.slm.stop()},
          {"pupil_n", c.grids.pupil_n},
          {"matrix", detail::matrix_name(c.focus.matrix)}};
}

inline FocusResult stage_focus(Run& run) {
  const RunConfig& c = run.cfg();
  FocusResult f = run.stage("focus", [&] { return run_focus(c); });
  run.write_grid("S_stack.plg", stack_to_grid(f.S));
  // |g|^2 in the focal plane closest to z = 0.
  FocusConfig fc = c.focus_config();
  fc.out_z = {0.0};
  const VectorField3D g0 = debye_focal_field(f.pupil.Ei, fc);
  std::ostringstream os;
  os << "x_um,y_um,intensity_V2_per_m2\n";
  for (std::size_t iy = 0; iy < g0.y.n; ++iy)
    for (std::size_t ix = 0; ix < g0.x.n; ++ix) {
      const std::size_t i = iy * g0.x.n + ix;
      const double v = std::norm(g0.gx[i]) + std::norm(g0.gy[i]) + std::norm(g0.gz[i]);
      os << num(g0.x.at(ix) * 1e6) << "," << num(g0.y.at(iy) * 1e6) << "," << num(v) << "\n";
    }
  run.write_text("focal_slice_z0.csv", os.str());
  run.write_json("focus_summary.json", focus_summary(c, f.pupil));
  return f;
}

inline PhaseResult stage_phase(Run& run, const ScalarFieldStack3D& S) {
  PhaseResult p = run.stage("phase", [&] { return run_phase(run.cfg(), S); });
  run.write_grid("phase_stack.plg", phase_to_grid(p.linear.stack));
  json meta = json::array();
  for (std::size_t k = 0; k < p.raw.meta.size(); ++k)
    meta.push_back({{"E_eV", p.raw.stack.energies[k]},
                    {"time_step_s", p.raw.meta[k].step},
                    {"half_window_s", p.raw.meta[k].half_window},
                    {"coverage_ok", p.raw.meta[k].coverage_ok}});
  run.write_json("phase_summary.json",
                 {{"linear_offset_rad", p.linear.offset},
                  {"linear_slope_rad_per_eV", p.linear.slope},
                  {"linear_change_rad", p.linear.total_change},
                  {"energy_shift_estimate_eV", p.linear.energy_shift},
                  {"coverage_ok", p.raw.coverage_ok},
                  {"quadrature", meta}});
  if (!p.raw.coverage_ok)
    std::cerr << "warning: electron path leaves the z stack; field treated as zero there\n";
  return p;
}

inline std::string radial_csv(const RadialProfile& r) {
  std::ostringstream os;
  os << "radius_nm,intensity_per_nm2\n";
  for (std::size_t k = 0; k < r.r.size(); ++k) os << num(r.r[k] * 1e9) << "," << num(r.I[k] * 1e-18) << "\n";
  return os.str();
}

inline json metrics_json(const MetricsReport& m, const ProbeProfile& I, const ProbeProfile& t) {
  return {{"sigma_nm", m.sigma_nm},
          {"target_sigma_nm", profile_sigma(t)},
          {"peak_ratio", m.peak_ratio},
          {"cc_eff_m", m.cc_eff},
          {"cc_eff_at_scan_boundary", m.cc_at_boundary},
          {"improvement_factor", m.improvement_factor},
          {"contrast_informational", m.contrast},
          {"captured_fraction", I.captured_fraction},
          {"pitch_m", I.pitch},
          {"psi0_profile", "top-hat"}};
}

inline void append_summary(Run& run, const MetricsReport& m) {
  const fs::path p = run.path("run_summary.csv");
  const bool fresh = !fs::exists(p);
  std::ofstream o(p, std::ios::app);
  if (!o) throw IoError("cannot append " + p.string());
  if (fresh) o << "seed,sigma_nm,peak_ratio,cc_eff_m,improvement_factor\n";
  o << run.cfg().seed << "," << num(m.sigma_nm) << "," << num(m.peak_ratio) << "," << num(m.cc_eff)
    << "," << num(m.improvement_factor) << "\n";
}

inline MetricsReport stage_probe(Run& run, const PhaseStack* phi) {
  const RunConfig& c = run.cfg();
  if (phi && phi->size() != std::size_t(c.grids.energy_samples))
    throw MismatchError("phase stack has " + std::to_string(phi->size()) + " energies, config expects " +
                        std::to_string(c.grids.energy_samples));
  if (phi) {
    const auto E = c.energies();
    for (std::size_t k = 0; k < E.size(); ++k)
      if (std::abs(phi->energies[k] - E[k].E) > 1e-6)
        throw MismatchError("phase stack energy grid differs from the config");
  }
  ProbeProfile I = run.stage("probe", [&] { return run_probe(c, phi); });
  ProbeProfile T = run.stage("target", [&] { return run_target(c); });
  run.write_grid("probe.plg", profile_to_grid(I));
  run.write_text("probe_radial.csv", radial_csv(density_profile(I)));
  run.write_text("target_radial.csv", radial_csv(density_profile(T)));
  MetricsReport m = run.stage("metrics", [&] { return run_metrics(c, I, T); });
  run.write_json("metrics.json", metrics_json(m, I, T));
  append_summary(run, m);
  return m;
}

inline OptimizeResult stage_optimize(Run& run) {
  const RunConfig& c = run.cfg();
  OptimizeResult r;
  auto write_trace = [&](const OptResult& o, const std::vector<int>& orders, bool dz) {
    std::ostringstream os;
    os << "restart,iteration,cost,best_cost,peak_GV_per_m";
    for (int n : orders) os << ",c" << n;
    if (dz) os << ",dz0_um";
    os << "\n";
    for (std::size_t rr = 0; rr < o.traces.size(); ++rr)
      for (auto& pt : o.traces[rr].points) {
        os << rr << "," << pt.iteration << "," << num(pt.cost) << "," << num(pt.best_cost);
        for (double v : pt.params) os << "," << num(v);
        os << "\n";
      }
    run.write_text("optimizer_trace.csv", os.str());
  };
  try {
    r = run.stage("optimize", [&] { return run_optimize(c); });
  } catch (const OptimizationFailure& f) {
    write_trace(f.result, shaping_orders(c), c.optimizer.cfg.optimize_defocus);
    throw;
  }
  write_trace(r.opt, r.orders, c.optimizer.cfg.optimize_defocus);
  run.write_json("best_params.json", config_to_json(r.tuned));
  json stops = json::array();
  for (auto& t : r.opt.traces) stops.push_back(t.stop_reason);
  run.write_json("optimize_summary.json",
                 {{"best_cost", r.opt.best_cost},
                  {"start_cost", r.start_cost},
                  {"objective", c.optimizer.cfg.optimize_defocus ? "cost2" : "cost"},
                  {"best_restart", r.opt.best_restart},
                  {"evaluations", r.opt.evaluations},
                  {"chi_builds", r.chi_builds},
                  {"best_peak_field_V_per_m", r.best.peak_GVm * 1e9},
                  {"best_dz0_m", r.tuned.beam.dz0},
                  {"stop_reasons", stops}});
  return r;
}

inline std::uint64_t file_hash(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return fnv1a64(ss.str());
}

inline void write_manifest(Run& run, const std::vector<std::string>& stages) {
  json files = json::array();
  for (auto& f : run.files()) {
    char h[17];
    std::snprintf(h, sizeof h, "%016llx", (unsigned long long)file_hash(run.path(f)));
    files.push_back({{"name", f}, {"fnv1a64", h}});
  }
  json m = {{"tool", "ponderolens"},
            {"version", version},
            {"seed", run.cfg().seed},
            {"stages", stages},
            {"config", config_to_json(run.cfg())},
            {"metadata",
             {{"v0_mode", run.cfg().v0 == V0Mode::exact ? "exact" : "rounded"},
              {"psi0_profile", "top-hat"},
              {"gamma_in_prefactor", "per-energy"},
              {"seed_split", "splitmix64(seed ^ fnv1a64(stage))"}}},
            {"outputs", files}};
  run.write_json("manifest.json", m);
  // Wall times vary between runs, so they stay out of the manifest.
  std::ofstream t(run.path("timings.json"));
  t << run.timings().dump(2) << "\n";
}

inline bool has_light(const RunConfig& c) { return c.slm.peak_field > 0 || c.slm.c0 > 0; }

inline std::vector<std::string> plan(const std::string& cmd, const RunConfig& c) {
  if (cmd == "pipeline") {
    std::vector<std::string> s;
    if (c.optimizer.enabled) s.push_back("optimize");
    if (has_light(c) || c.optimizer.enabled) {
      s.push_back("focus");
      s.push_back("phase");
    }
    s.insert(s.end(), {"probe", "metrics"});
    return s;
  }
  if (cmd == "probe") return has_light(c) ? std::vector<std::string>{"focus*", "phase*", "probe", "metrics"}
                                          : std::vector<std::string>{"probe", "metrics"};
  if (cmd == "phase") return {"focus*", "phase"};
  return {cmd};
}

inline int cmd_focus(Run& run) {
  stage_focus(run);
  write_manifest(run, {"focus"});
  return 0;
}

inline ScalarFieldStack3D load_or_focus(Run& run, const Options& o) {
  if (o.input) return grid_to_stack(read_grid_file(*o.input), gamma_of(run.cfg().beam.E0));
  return stage_focus(run).S;
}

inline int cmd_phase(Run& run, const Options& o) {
  const ScalarFieldStack3D S = load_or_focus(run, o);
  stage_phase(run, S);
  write_manifest(run, {"phase"});
  return 0;
}

inline int cmd_probe(Run& run, const Options& o) {
  std::optional<PhaseStack> phi;
  if (o.input) phi = grid_to_phase(read_grid_file(*o.input));
  else if (has_light(run.cfg())) {
    const auto f = stage_focus(run);
    phi = stage_phase(run, f.S).linear.stack;
  }
  stage_probe(run, phi ? &*phi : nullptr);
  write_manifest(run, {"probe", "metrics"});
  return 0;
}

inline int cmd_optimize(Run& run) {
  if (!run.cfg().optimizer.enabled) std::cerr << "note: optimizer.enabled is false; running anyway\n";
  stage_optimize(run);
  write_manifest(run, {"optimize"});
  return 0;
}

inline int cmd_metrics(Run& run, const Options& o) {
  if (!o.input) throw ConfigError("metrics: --input PATH to a probe.plg is required");
  const GridFile g = read_grid_file(*o.input);
  const RunConfig& c = run.cfg();
  const Axis out = c.grids.probe.out_axis();
  if (g.dims.size() != 2 || g.dims[0] != out.n || g.dims[1] != out.n || g.axis_min[1] != out.min ||
      g.axis_max[1] != out.max)
    throw MismatchError("probe grid in " + *o.input + " does not match grids.probe_* in the config");
  ProbeProfile I;
  I.I = Grid2D<double>(out, out);
  I.I.data = g.real;
  I.pitch = out.step();
  // The file holds window-normalised intensity only, so peak ratios fall back
  // to window normalisation.
  I.captured_fraction = 1.0;
  ProbeProfile T = run.stage("target", [&] { return run_target(c); });
  T.captured_fraction = 1.0;
  MetricsReport m = run.stage("metrics", [&] { return run_metrics(c, I, T); });
  json j = metrics_json(m, I, T);
  j["peak_ratio_normalisation"] = "window";
  run.write_json("metrics.json", j);
  append_summary(run, m);
  write_manifest(run, {"metrics"});
  return 0;
}

inline int cmd_pipeline(Run& run) {
  std::vector<std::string> stages;
  if (run.cfg().optimizer.enabled) {
    const OptimizeResult r = stage_optimize(run);
    run.cfg() = r.tuned;
    stages.push_back("optimize");
  }
  std::optional<PhaseStack> phi;
  if (has_light(run.cfg())) {
    const auto f = stage_focus(run);
    phi = stage_phase(run, f.S).linear.stack;
    stages.insert(stages.end(), {"focus", "phase"});
  }
  stage_probe(run, phi ? &*phi : nullptr);
  stages.insert(stages.end(), {"probe", "metrics"});
  write_manifest(run, stages);
  return 0;
}

}  // namespace ponderolens::cli
