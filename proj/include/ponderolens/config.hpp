#pragma once
#include <cstdint>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>

#include <json.hpp>

#include "electron_probe.hpp"
#include "errors.hpp"
#include "kinematics.hpp"
#include "metrics.hpp"
#include "optimizer.hpp"
#include "ponderomotive.hpp"
#include "vector_focus.hpp"
#include "zernike.hpp"

namespace ponderolens {

using json = nlohmann::json;

struct SlmConfig {
  int l = 0;
  double peak_field = 0;   ///< V/m; sets c0 via the peak survey when > 0
  double c0 = 0;           ///< V/m; used directly when peak_field == 0
  std::map<int, double> zernike;
  double waist_fraction = 0.43;  ///< w_o / pupil_radius
  double w_o = 0;                ///< m; overrides waist_fraction when > 0
  double pupil_radius = 0;       ///< m; 0 derives f tan(asin NA)
  int phase_levels = 0;
};

struct FocusGrid {
  double NA = 0.14, f = 0.05;
  double half_x = 2.5e-6, half_y = 2.5e-6;
  std::size_t nx = 201, ny = 201;
  double z_min = -20e-6, z_max = 20e-6;
  std::size_t nz = 161;
  MatrixForm matrix = MatrixForm::standard;
};

struct Grids {
  std::size_t pupil_n = 1024;
  std::size_t optimizer_pupil_n = 256;
  std::size_t line_n = 41;
  double survey_half = 20e-6;
  std::size_t survey_n = 81;
  ProbeGrid probe;
  int energy_samples = 41;
  double energy_span_sigmas = 3.0;
  QuadratureSettings quad;
};

struct InitRanges {
  std::pair<double, double> peak_GVm{5, 40}, zernike{-2, 2}, dz0_um{-15, 15};
};

struct OptimizerSection {
  bool enabled = false;
  OptimizerConfig cfg;
  InitRanges init;
};

struct MetricsConfig {
  double cc_min = 0.1e-3, cc_max = 8e-3;
  std::size_t cc_n = 80;
  Similarity similarity = Similarity::l2;
  double contrast_r1 = 5e-9, contrast_r2 = 10e-9;
};

struct RunConfig {
  std::uint64_t seed = 0;
  std::string output_dir = "out";
  ElectronBeamParams beam;
  V0Mode v0 = V0Mode::exact;
  LaserParams laser;
  SlmConfig slm;
  FocusGrid focus;
  Grids grids;
  OptimizerSection optimizer;
  MetricsConfig metrics;

  FocusConfig focus_config() const {
    FocusConfig f;
    f.lambda_o = laser.lambda_o;
    f.NA = focus.NA;
    f.f_o = focus.f;
    f.out_x = focus.half_x;
    f.out_y = focus.half_y;
    f.nx_out = focus.nx;
    f.ny_out = focus.ny;
    f.out_z = linspace(focus.z_min, focus.z_max, focus.nz);
    f.matrix = focus.matrix;
    return f;
  }
  /// SLM geometry with unit c0; amplitude is fixed later.
  SlmSpec slm_spec() const {
    const FocusConfig f = focus_config();
    SlmSpec s;
    s.l = slm.l;
    s.c0 = 1.0;
    s.zernike_weights = slm.zernike;
    s.pupil_radius = slm.pupil_radius > 0 ? slm.pupil_radius : f.pupil_radius();
    s.w_o = slm.w_o > 0 ? slm.w_o : slm.waist_fraction * s.pupil_radius;
    s.aperture_radius = f.aperture_radius();
    s.phase_levels = slm.phase_levels;
    return s;
  }
  std::vector<EnergySample> energies() const {
    return energy_grid(beam, grids.energy_samples, grids.energy_span_sigmas, v0);
  }
  void validate() const {
    beam.validate();
    laser.validate();
    focus_config().validate();
    slm_spec().validate();
    grids.probe.validate();
    if (grids.pupil_n < 64 || grids.optimizer_pupil_n < 64)
      throw ConfigError("grids: pupil sizes must be >= 64");
    if (grids.survey_n < 3 || !(grids.survey_half > 0)) throw ConfigError("grids: bad survey axis");
    if (grids.energy_samples < 3 || grids.energy_samples % 2 == 0)
      throw ConfigError("grids.energy_samples must be odd and >= 3");
    if (slm.peak_field < 0 || slm.c0 < 0) throw ConfigError("slm amplitude must be >= 0");
    if (slm.peak_field > 0 && slm.c0 > 0)
      throw ConfigError("slm: give either peak_field_V_per_m or c0_V_per_m, not both");
    if (optimizer.enabled) optimizer.cfg.validate();
    if (!(metrics.cc_min > 0 && metrics.cc_max > metrics.cc_min) || metrics.cc_n < 3)
      throw ConfigError("metrics: bad Cc scan");
  }
};

namespace detail {

/// Walks a JSON object, rejecting unknown keys and naming the failing field.
class Reader {
 public:
  Reader(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError(where("") + ": expected an object");
  }
  ~Reader() noexcept(false) {
    if (std::uncaught_exceptions()) return;
    for (auto it = j_.begin(); it != j_.end(); ++it)
      if (!seen_.count(it.key())) throw ConfigError(where(it.key()) + ": unknown field");
  }
  template <class T>
  void opt(const std::string& k, T& out) {
    seen_.insert(k);
    if (!j_.contains(k)) return;
    try {
      out = j_.at(k).get<T>();
    } catch (const json::exception& e) {
      throw ConfigError(where(k) + ": " + e.what());
    }
  }
  void range(const std::string& k, std::pair<double, double>& out) {
    seen_.insert(k);
    if (!j_.contains(k)) return;
    const json& v = j_.at(k);
    if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number())
      throw ConfigError(where(k) + ": expected [low, high]");
    out = {v[0].get<double>(), v[1].get<double>()};
  }
  bool has(const std::string& k) const { return j_.contains(k); }
  Reader child(const std::string& k) {
    seen_.insert(k);
    static const json empty = json::object();
    return Reader(j_.contains(k) ? j_.at(k) : empty, where(k));
  }
  std::string where(const std::string& k) const {
    return k.empty() ? (path_.empty() ? "<root>" : path_) : (path_.empty() ? k : path_ + "." + k);
  }
  const json& raw(const std::string& k) {
    seen_.insert(k);
    return j_.at(k);
  }

 private:
  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

inline std::string matrix_name(MatrixForm m) { return m == MatrixForm::standard ? "standard" : "printed"; }
inline std::string sim_name(Similarity s) { return s == Similarity::l2 ? "l2" : "ncc"; }

}  // namespace detail

inline RunConfig config_from_json(const json& j) {
  using detail::Reader;
  RunConfig c;
  {
    Reader r(j, "");
    r.opt("seed", c.seed);
    r.opt("output_dir", c.output_dir);
    {
      Reader b = r.child("beam");
      b.opt("E0_eV", c.beam.E0);
      b.opt("dE_eV", c.beam.dE);
      b.opt("Cc_m", c.beam.Cc);
      b.opt("alpha_max_rad", c.beam.alpha_max);
      b.opt("w_e_m", c.beam.w_e);
      b.opt("tau_e_s", c.beam.tau_e);
      b.opt("dz0_m", c.beam.dz0);
      std::string v0 = "exact";
      b.opt("v0_mode", v0);
      if (v0 != "exact" && v0 != "rounded") throw ConfigError("beam.v0_mode: expected exact|rounded");
      c.v0 = v0 == "exact" ? V0Mode::exact : V0Mode::rounded;
    }
    {
      Reader l = r.child("laser");
      l.opt("lambda_m", c.laser.lambda_o);
      l.opt("tau0_s", c.laser.tau_0);
      l.opt("t0_s", c.laser.t_0);
    }
    {
      Reader s = r.child("slm");
      s.opt("l", c.slm.l);
      s.opt("peak_field_V_per_m", c.slm.peak_field);
      s.opt("c0_V_per_m", c.slm.c0);
      s.opt("waist_fraction", c.slm.waist_fraction);
      s.opt("w_o_m", c.slm.w_o);
      s.opt("pupil_radius_m", c.slm.pupil_radius);
      s.opt("phase_levels", c.slm.phase_levels);
      if (s.has("zernike")) {
        const json& z = s.raw("zernike");
        if (!z.is_object()) throw ConfigError("slm.zernike: expected an object of order -> weight");
        for (auto it = z.begin(); it != z.end(); ++it) {
          int n = 0;
          try {
            std::size_t pos = 0;
            n = std::stoi(it.key(), &pos);
            if (pos != it.key().size()) throw std::invalid_argument("");
          } catch (...) {
            throw ConfigError("slm.zernike." + it.key() + ": order must be an integer");
          }
          if (!it.value().is_number()) throw ConfigError("slm.zernike." + it.key() + ": expected a number");
          c.slm.zernike[n] = it.value().get<double>();
        }
      }
    }
    {
      Reader f = r.child("focus");
      f.opt("NA", c.focus.NA);
      f.opt("f_m", c.focus.f);
      f.opt("half_x_m", c.focus.half_x);
      f.opt("half_y_m", c.focus.half_y);
      f.opt("nx", c.focus.nx);
      f.opt("ny", c.focus.ny);
      f.opt("z_min_m", c.focus.z_min);
      f.opt("z_max_m", c.focus.z_max);
      f.opt("nz", c.focus.nz);
      std::string m = "standard";
      f.opt("matrix", m);
      if (m != "standard" && m != "printed") throw ConfigError("focus.matrix: expected standard|printed");
      c.focus.matrix = m == "standard" ? MatrixForm::standard : MatrixForm::printed;
    }
    {
      Reader g = r.child("grids");
      g.opt("pupil_n", c.grids.pupil_n);
      g.opt("optimizer_pupil_n", c.grids.optimizer_pupil_n);
      g.opt("line_n", c.grids.line_n);
      g.opt("survey_half_m", c.grids.survey_half);
      g.opt("survey_n", c.grids.survey_n);
      g.opt("probe_ip_n", c.grids.probe.ip_n);
      g.opt("probe_out_n", c.grids.probe.out_n);
      g.opt("probe_out_half_m", c.grids.probe.out_half);
      g.opt("energy_samples", c.grids.energy_samples);
      g.opt("energy_span_sigmas", c.grids.energy_span_sigmas);
      g.opt("quad_steps_per_sigma", c.grids.quad.steps_per_sigma);
      g.opt("envelope_cut", c.grids.quad.envelope_cut);
    }
    {
      Reader o = r.child("optimizer");
      auto& oc = c.optimizer.cfg;
      o.opt("enabled", c.optimizer.enabled);
      o.opt("n_restarts", oc.n_restarts);
      o.opt("lr0", oc.lr0);
      o.opt("momentum", oc.momentum);
      o.opt("fd_step", oc.fd_step);
      o.opt("fd_floor", oc.fd_floor);
      o.opt("lr_floor", oc.lr_floor);
      o.opt("backoff", oc.backoff);
      o.opt("stagnation_window", oc.stagnation_window);
      o.opt("stagnation_tol", oc.stagnation_tol);
      o.opt("max_iters", oc.max_iters);
      o.opt("optimize_defocus", oc.optimize_defocus);
      Reader in = o.child("init_ranges");
      in.range("peak_GVm", c.optimizer.init.peak_GVm);
      in.range("zernike", c.optimizer.init.zernike);
      in.range("dz0_um", c.optimizer.init.dz0_um);
    }
    {
      Reader m = r.child("metrics");
      m.opt("cc_scan_min_m", c.metrics.cc_min);
      m.opt("cc_scan_max_m", c.metrics.cc_max);
      m.opt("cc_scan_n", c.metrics.cc_n);
      std::string s = "l2";
      m.opt("similarity", s);
      if (s != "l2" && s != "ncc") throw ConfigError("metrics.similarity: expected l2|ncc");
      c.metrics.similarity = s == "l2" ? Similarity::l2 : Similarity::ncc;
      m.opt("contrast_r1_m", c.metrics.contrast_r1);
      m.opt("contrast_r2_m", c.metrics.contrast_r2);
    }
  }
  c.validate();
  return c;
}

inline json config_to_json(const RunConfig& c) {
  json z = json::object();
  for (auto& [n, w] : c.slm.zernike) z[std::to_string(n)] = w;
  const auto& oc = c.optimizer.cfg;
  const auto& in = c.optimizer.init;
  auto pair = [](const std::pair<double, double>& p) { return json::array({p.first, p.second}); };
  return json{
      {"seed", c.seed},
      {"output_dir", c.output_dir},
      {"beam",
       {{"E0_eV", c.beam.E0}, {"dE_eV", c.beam.dE}, {"Cc_m", c.beam.Cc},
        {"alpha_max_rad", c.beam.alpha_max}, {"w_e_m", c.beam.w_e}, {"tau_e_s", c.beam.tau_e},
        {"dz0_m", c.beam.dz0}, {"v0_mode", c.v0 == V0Mode::exact ? "exact" : "rounded"}}},
      {"laser", {{"lambda_m", c.laser.lambda_o}, {"tau0_s", c.laser.tau_0}, {"t0_s", c.laser.t_0}}},
      {"slm",
       {{"l", c.slm.l}, {"peak_field_V_per_m", c.slm.peak_field}, {"c0_V_per_m", c.slm.c0},
        {"zernike", z}, {"waist_fraction", c.slm.waist_fraction}, {"w_o_m", c.slm.w_o},
        {"pupil_radius_m", c.slm.pupil_radius}, {"phase_levels", c.slm.phase_levels}}},
      {"focus",
       {{"NA", c.focus.NA}, {"f_m", c.focus.f}, {"half_x_m", c.focus.half_x},
        {"half_y_m", c.focus.half_y}, {"nx", c.focus.nx}, {"ny", c.focus.ny},
        {"z_min_m", c.focus.z_min}, {"z_max_m", c.focus.z_max}, {"nz", c.focus.nz},
        {"matrix", detail::matrix_name(c.focus.matrix)}}},
      {"grids",
       {{"pupil_n", c.grids.pupil_n}, {"optimizer_pupil_n", c.grids.optimizer_pupil_n},
        {"line_n", c.grids.line_n}, {"survey_half_m", c.grids.survey_half},
        {"survey_n", c.grids.survey_n}, {"probe_ip_n", c.grids.probe.ip_n},
        {"probe_out_n", c.grids.probe.out_n}, {"probe_out_half_m", c.grids.probe.out_half},
        {"energy_samples", c.grids.energy_samples},
        {"energy_span_sigmas", c.grids.energy_span_sigmas},
        {"quad_steps_per_sigma", c.grids.quad.steps_per_sigma},
        {"envelope_cut", c.grids.quad.envelope_cut}}},
      {"optimizer",
       {{"enabled", c.optimizer.enabled}, {"n_restarts", oc.n_restarts}, {"lr0", oc.lr0},
        {"momentum", oc.momentum}, {"fd_step", oc.fd_step}, {"fd_floor", oc.fd_floor},
        {"lr_floor", oc.lr_floor}, {"backoff", oc.backoff},
        {"stagnation_window", oc.stagnation_window}, {"stagnation_tol", oc.stagnation_tol},
        {"max_iters", oc.max_iters}, {"optimize_defocus", oc.optimize_defocus},
        {"init_ranges",
         {{"peak_GVm", pair(in.peak_GVm)}, {"zernike", pair(in.zernike)},
          {"dz0_um", pair(in.dz0_um)}}}}},
      {"metrics",
       {{"cc_scan_min_m", c.metrics.cc_min}, {"cc_scan_max_m", c.metrics.cc_max},
        {"cc_scan_n", c.metrics.cc_n}, {"similarity", detail::sim_name(c.metrics.similarity)},
        {"contrast_r1_m", c.metrics.contrast_r1}, {"contrast_r2_m", c.metrics.contrast_r2}}}};
}

inline bool operator==(const RunConfig& a, const RunConfig& b) {
  return config_to_json(a) == config_to_json(b);
}

/// Parses a config document, reporting syntax errors with line and column.
inline RunConfig parse_config(const std::string& text, const std::string& origin = "<config>") {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    std::size_t line = 1, col = 1;
    for (std::size_t i = 0; i + 1 < e.byte && i < text.size(); ++i) {
      if (text[i] == '\n') ++line, col = 1;
      else ++col;
    }
    std::ostringstream os;
    os << origin << ":" << line << ":" << col << ": syntax error: " << e.what();
    throw ConfigError(os.str());
  }
  try {
    return config_from_json(j);
  } catch (const ConfigError& e) {
    throw ConfigError(origin + ": " + e.what());
  }
}

inline RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), path);
}

}  // namespace ponderolens
