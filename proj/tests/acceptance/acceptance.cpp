// Acceptance harness: one PASS/FAIL line per criterion.
// Usage: acceptance [--criterion N] [--full] [--strict]
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <ponderolens/ponderolens.hpp>

#include "../../tools/commands.hpp"

using namespace ponderolens;
namespace fs = std::filesystem;

namespace {

// ---- pinned tolerances ------------------------------------------------------
constexpr double kSigmaAberrated = 6.07, kSigmaAberratedTol = 0.10;
constexpr double kSigmaTarget = 2.39, kSigmaTargetTol = 0.10;
constexpr double kSigmaVortex = 2.67, kSigmaGauss = 2.72, kSigmaCorrTol = 0.15;
constexpr double kCcVortex = 1.2e-3, kCcGauss = 1.1e-3, kCcTol = 0.25, kMinImprovement = 5.0;
constexpr double kPeakAberrated = 0.25, kPeakAberratedTol = 0.05, kPeakCorrectedMin = 0.75;
constexpr double kZoomTol = 1e-10;
constexpr double kOrthoTol = 1e-12;
constexpr double kAnalyticTol = 1e-6, kHalvingTol = 1e-6;
constexpr double kVortexCostMax = 0.1, kVortexCostAnchor = 0.0439, kAnchorTol = 0.02;
constexpr double kOptCostFactor = 1.2, kDzTolVortex = 3.0, kDzTolGauss = 2.0;
constexpr double kPulseVortex = 16e-6, kPulseGauss = 4e-6, kPulseTol = 0.5;
constexpr double kWeightTol = 1e-12, kNormTol = 1e-9;

struct Check {
  std::string what;
  bool ok;
};

struct Outcome {
  std::vector<Check> checks;
  std::vector<std::string> info;
  void check(bool ok, const std::string& what) { checks.push_back({what, ok}); }
  void note(const std::string& s) { info.push_back(s); }
  bool ok() const {
    for (auto& c : checks)
      if (!c.ok) return false;
    return !checks.empty();
  }
};

std::string fmt(const char* f, auto... a) {
  char b[512];
  std::snprintf(b, sizeof b, f, a...);
  return b;
}

bool within(double v, double want, double rel) { return std::abs(v / want - 1.0) <= rel; }

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string repo(const std::string& rel) { return std::string(PONDEROLENS_SOURCE_DIR) + "/" + rel; }

RunConfig config(const std::string& name) { return load_config(repo("configs/" + name + ".json")); }

// ---- cached focal phase stacks ---------------------------------------------

/// Light phase (linear energy part removed) for a config; independent of dz0.
PhaseStack focal_phase(const RunConfig& cfg, double* seconds = nullptr) {
  RunConfig key = cfg;
  key.beam.dz0 = 0;
  key.seed = 0;
  key.output_dir = "";
  char h[17];
  std::snprintf(h, sizeof h, "%016llx", (unsigned long long)fnv1a64(config_to_json(key).dump()));
  const fs::path dir = "acceptance_cache";
  fs::create_directories(dir);
  const fs::path file = dir / (std::string(h) + ".plg");
  const auto t0 = std::chrono::steady_clock::now();
  if (fs::exists(file)) {
    auto p = cli::grid_to_phase(read_grid_file(file.string()));
    if (seconds) *seconds = -1;
    return p;
  }
  const FocusResult f = run_focus(cfg);
  const PhaseResult ph = run_phase(cfg, f.S);
  write_grid_file(file.string(), cli::phase_to_grid(ph.linear.stack));
  if (seconds) *seconds = seconds_since(t0);
  return ph.linear.stack;
}

struct Corrected {
  ProbeProfile I, target;
  double sigma = 0, stack_seconds = 0, probe_seconds = 0;
};

Corrected corrected_probe(const RunConfig& cfg, const PhaseStack& phi) {
  Corrected c;
  const auto t0 = std::chrono::steady_clock::now();
  c.I = run_probe(cfg, &phi);
  c.probe_seconds = seconds_since(t0);
  c.target = run_target(cfg);
  c.sigma = profile_sigma(c.I);
  return c;
}

double self_consistent_dz0(const RunConfig& cfg) {
  const CostContext ctx(make_cost_setup(cfg));
  return ctx.self_consistent_dz0_um(ctx.slice(config_params(cfg)).phi);
}

// ---- criteria ---------------------------------------------------------------

Outcome c1() {
  Outcome o;
  const RunConfig cfg = config("aberrated");
  const auto t0 = std::chrono::steady_clock::now();
  const ProbeProfile I = run_probe(cfg, nullptr);
  const double t = seconds_since(t0), s = profile_sigma(I);
  o.check(within(s, kSigmaAberrated, kSigmaAberratedTol),
          fmt("sigma %.3f nm (want %.2f +-%.0f%%)", s, kSigmaAberrated, kSigmaAberratedTol * 100));
  o.check(t < 30, fmt("runtime %.1f s (< 30 s)", t));
  return o;
}

Outcome c2() {
  Outcome o;
  const ProbeProfile T = run_target(config("aberrated"));
  const double s = profile_sigma(T);
  o.check(within(s, kSigmaTarget, kSigmaTargetTol),
          fmt("target sigma %.3f nm, top-hat psi0 (want %.2f +-%.0f%%)", s, kSigmaTarget, kSigmaTargetTol * 100));
  return o;
}

Outcome c3() {
  Outcome o;
  for (auto [name, want] : {std::pair{"vortex", kSigmaVortex}, std::pair{"gaussian", kSigmaGauss}}) {
    const RunConfig cfg = config(name);
    const auto t0 = std::chrono::steady_clock::now();
    double stack_s = 0;
    const PhaseStack phi = focal_phase(cfg, &stack_s);
    const Corrected c = corrected_probe(cfg, phi);
    const double total = seconds_since(t0);
    o.check(within(c.sigma, want, kSigmaCorrTol),
            fmt("%s sigma %.3f nm at dz0 %+.1f um (want %.2f +-%.0f%%)", name, c.sigma, cfg.beam.dz0 * 1e6, want,
                kSigmaCorrTol * 100));
    if (stack_s >= 0) o.check(total < 600, fmt("%s runtime %.0f s incl. 3-D stack (< 600 s)", name, total));
    else o.note(fmt("%s focal stack reused from cache; probe %.1f s", name, c.probe_seconds));
    RunConfig sc = cfg;
    sc.beam.dz0 = self_consistent_dz0(cfg) * 1e-6;
    const Corrected d = corrected_probe(sc, phi);
    o.note(fmt("%s at self-consistent dz0 %+.1f um: sigma %.3f nm", name, sc.beam.dz0 * 1e6, d.sigma));
  }
  return o;
}

Outcome c4() {
  Outcome o;
  for (auto [name, want] : {std::pair{"vortex", kCcVortex}, std::pair{"gaussian", kCcGauss}}) {
    const RunConfig cfg = config(name);
    const PhaseStack phi = focal_phase(cfg);
    for (bool reference : {true, false}) {
      RunConfig run = cfg;
      if (!reference) run.beam.dz0 = self_consistent_dz0(cfg) * 1e-6;
      const Corrected c = corrected_probe(run, phi);
      const MetricsReport m = run_metrics(run, c.I, c.target);
      const std::string line = fmt("%s dz0 %+.1f um: Cc_eff %.3f mm%s, improvement %.2f", name, run.beam.dz0 * 1e6,
                                   m.cc_eff * 1e3, m.cc_at_boundary ? " (scan boundary)" : "", m.improvement_factor);
      if (reference) {
        o.check(within(m.cc_eff, want, kCcTol) && !m.cc_at_boundary,
                line + fmt(" (want %.1f mm +-%.0f%%)", want * 1e3, kCcTol * 100));
        o.check(m.improvement_factor >= kMinImprovement, fmt("%s improvement %.2f (>= %.0f)", name,
                                                             m.improvement_factor, kMinImprovement));
      } else {
        o.note(line);
      }
    }
  }
  return o;
}

Outcome c5() {
  Outcome o;
  const RunConfig ab = config("aberrated");
  const ProbeProfile T = run_target(ab);
  const double r = peak_ratio(run_probe(ab, nullptr), T);
  o.check(std::abs(r - kPeakAberrated) <= kPeakAberratedTol,
          fmt("aberrated peak ratio %.3f (want %.2f +-%.2f)", r, kPeakAberrated, kPeakAberratedTol));
  for (const char* name : {"vortex", "gaussian"}) {
    const RunConfig cfg = config(name);
    const PhaseStack phi = focal_phase(cfg);
    const Corrected c = corrected_probe(cfg, phi);
    const double rc = peak_ratio(c.I, c.target);
    o.check(rc > kPeakCorrectedMin, fmt("%s corrected peak ratio %.3f (want > %.2f)", name, rc, kPeakCorrectedMin));
    RunConfig sc = cfg;
    sc.beam.dz0 = self_consistent_dz0(cfg) * 1e-6;
    const Corrected d = corrected_probe(sc, phi);
    o.note(fmt("%s at self-consistent dz0 %+.1f um: peak ratio %.3f", name, sc.beam.dz0 * 1e6,
               peak_ratio(d.I, d.target)));
  }
  return o;
}

Outcome c6() {
  Outcome o;
  const auto t0 = std::chrono::steady_clock::now();
  std::mt19937_64 g(derive_seed(6, "acceptance/zoom"));
  std::uniform_int_distribution<int> size(1, 32), osize(2, 32);
  std::uniform_real_distribution<double> u(-1, 1), span(0.01, 2.0);
  double worst = 0;
  for (int t = 0; t < 200; ++t) {
    const std::size_t nx = size(g), ny = size(g), kx = osize(g), ky = osize(g);
    std::vector<cplx> f(nx * ny);
    for (auto& v : f) v = {u(g), u(g)};
    const double fx = 4 * u(g), fy = 4 * u(g), dfx = span(g) / double(kx), dfy = span(g) / double(ky);
    const auto z = bluestein_dft2(f, nx, ny, fx, fy, dfx, dfy, kx, ky);
    double num = 0, den = 0;
    for (std::size_t b = 0; b < ky; ++b)
      for (std::size_t a = 0; a < kx; ++a) {
        long double re = 0, im = 0;
        const long double ux = fx + (long double)a * dfx, uy = fy + (long double)b * dfy;
        for (std::size_t my = 0; my < ny; ++my)
          for (std::size_t mx = 0; mx < nx; ++mx) {
            const long double ph = -2.0L * 3.14159265358979323846264338327950288L * (ux * mx + uy * my);
            const cplx v = f[my * nx + mx];
            re += v.real() * cosl(ph) - v.imag() * sinl(ph);
            im += v.real() * sinl(ph) + v.imag() * cosl(ph);
          }
        const cplx ref{double(re), double(im)};
        num = std::max(num, std::abs(z[b * kx + a] - ref));
        den = std::max(den, std::abs(ref));
      }
    worst = std::max(worst, num / den);
  }
  const double t = seconds_since(t0);
  o.check(worst < kZoomTol, fmt("max relative error %.2e over 200 grids (< %.0e)", worst, kZoomTol));
  o.check(t < 10, fmt("runtime %.2f s (< 10 s)", t));
  return o;
}

Outcome c7() {
  Outcome o;
  double worst = 0;
  for (int i = 0; i < 32; ++i)
    for (int j = 0; j < 32; ++j) {
      const Mat3 M = polarization_matrix(0.5 * constants::pi * i / 31.0, 2 * constants::pi * j / 32.0);
      for (int a = 0; a < 3; ++a)
        for (int b = 0; b < 3; ++b) {
          double s = 0;
          for (int k = 0; k < 3; ++k) s += M[k][a] * M[k][b];
          worst = std::max(worst, std::abs(s - (a == b)));
        }
    }
  o.check(worst <= kOrthoTol, fmt("max |M^T M - I| %.2e on 32x32 lattice (<= %.0e)", worst, kOrthoTol));
  bool exact = true;
  for (int j = 0; j < 64; ++j) {
    const Mat3 M = polarization_matrix(0.0, 2 * constants::pi * j / 64.0);
    for (int a = 0; a < 3; ++a)
      for (int b = 0; b < 3; ++b) exact = exact && M[a][b] == (a == b ? 1.0 : 0.0);
  }
  o.check(exact, "M(0, phi) == I exactly for 64 azimuths");
  return o;
}

Outcome c8() {
  Outcome o;
  const LaserParams laser;
  const ElectronBeamParams beam;
  ScalarFieldStack3D S;
  S.x = Axis{1, 0, 0};
  S.y = Axis::symmetric(3, 1e-6);
  S.z = linspace(-40e-6, 40e-6, 81);
  const double S0 = 2.5e20;
  S.S.assign(S.z.size() * 3, S0);
  double worst = 0;
  for (auto& e : energy_grid(beam, 41)) {
    const double beta = velocity_of(e.E) / constants::c;
    const double want = -ponder_prefactor(e.E, laser) * S0 * laser.sigma_t() * std::sqrt(constants::pi) / (1 + beta);
    const auto m = ponder_phase_single(S, laser, beam, e.E, e.z0p);
    for (double v : m.data) worst = std::max(worst, std::abs(v / want - 1));
  }
  o.check(worst < kAnalyticTol, fmt("constant-S closed form: max rel. error %.2e (< %.0e)", worst, kAnalyticTol));

  // Halving on a structured stack.
  for (std::size_t iz = 0; iz < S.z.size(); ++iz)
    for (std::size_t i = 0; i < 3; ++i)
      S.S[iz * 3 + i] = S0 * std::exp(-std::pow(S.z[iz] - 2e-6, 2) / 36e-12) * (1.0 + 0.3 * double(i));
  QuadratureSettings fine;
  fine.steps_per_sigma *= 2;
  double dh = 0;
  for (auto& e : energy_grid(beam, 41)) {
    const auto a = ponder_phase_single(S, laser, beam, e.E, e.z0p);
    const auto b = ponder_phase_single(S, laser, beam, e.E, e.z0p, nullptr, fine);
    for (std::size_t i = 0; i < 3; ++i) dh = std::max(dh, std::abs(a.data[i] / b.data[i] - 1));
  }
  o.check(dh < kHalvingTol, fmt("time-step halving: max rel. change %.2e (< %.0e)", dh, kHalvingTol));
  return o;
}

Outcome c9() {
  Outcome o;
  const RunConfig cfg = config("vortex");
  const CostContext ctx(make_cost_setup(cfg));
  ShapeParams zero = config_params(cfg);
  zero.peak_GVm = 0;
  const double c0 = ctx.cost(zero);
  o.check(c0 == 1.0, fmt("cost at zero field %.17g (exactly 1)", c0));
  const double c = ctx.cost(config_params(cfg));
  o.check(c < kVortexCostMax, fmt("cost at reference vortex coefficients %.4f (< %.1f)", c, kVortexCostMax));
  o.check(within(c, kVortexCostAnchor, kAnchorTol),
          fmt("regression anchor %.4f (recorded %.4f +-%.0f%%)", c, kVortexCostAnchor, kAnchorTol * 100));
  const double g = CostContext(make_cost_setup(config("gaussian"))).cost(config_params(config("gaussian")));
  o.note(fmt("cost at reference gaussian coefficients %.4f", g));
  return o;
}

RunConfig smoke(RunConfig c) {
  c.grids.optimizer_pupil_n = 96;
  c.focus.nz = 61;
  c.grids.energy_samples = 15;
  c.grids.line_n = 31;
  c.optimizer.enabled = true;
  c.optimizer.cfg.optimize_defocus = true;
  c.optimizer.cfg.n_restarts = 3;
  c.optimizer.cfg.max_iters = 40;
  return c;
}

Outcome c10(bool full) {
  Outcome o;
  const auto t0 = std::chrono::steady_clock::now();
  o.note(full ? "mode: full (full-scale grids, 16 restarts)" : "mode: smoke (reduced grids; --full for full scale)");
  for (auto [name, tol] : {std::pair{"vortex", kDzTolVortex}, std::pair{"gaussian", kDzTolGauss}}) {
    RunConfig cfg = config(name);
    cfg.optimizer.enabled = true;
    cfg.optimizer.cfg.optimize_defocus = true;
    if (!full) cfg = smoke(cfg);
    const double pub_dz = cfg.beam.dz0 * 1e6;
    const OptimizeResult r = run_optimize(cfg);
    const double limit = kOptCostFactor * r.start_cost;
    o.check(r.opt.best_cost <= limit, fmt("%s final cost2 %.3f vs reference-coefficient cost2 %.3f (<= x%.1f)", name,
                                          r.opt.best_cost, r.start_cost, kOptCostFactor));
    o.check(std::abs(r.best.dz0_um - pub_dz) <= tol,
            fmt("%s recovered dz0 %+.2f um vs reference %+.1f um (+-%.0f um)", name, r.best.dz0_um, pub_dz, tol));
    o.note(fmt("%s best peak %.2f GV/m, %ld evaluations", name, r.best.peak_GVm, r.opt.evaluations));
  }
  const double t = seconds_since(t0);
  if (full) o.check(t < 7200, fmt("runtime %.0f s (< 2 h)", t));
  else o.check(t < 300, fmt("smoke runtime %.0f s (< 5 min)", t));
  return o;
}

Outcome c11() {
  Outcome o;
  for (auto [name, want] : {std::pair{"vortex", kPulseVortex}, std::pair{"gaussian", kPulseGauss}}) {
    const RunConfig cfg = config(name);
    const CalibratedPupil p = calibrate_pupil(cfg, cfg.grids.pupil_n);
    o.check(within(p.pulse_energy, want, kPulseTol),
            fmt("%s pulse energy %.1f uJ at %.0f GV/m (want %.0f uJ +-%.0f%%)", name, p.pulse_energy * 1e6,
                p.peak_field * 1e-9, want * 1e6, kPulseTol * 100));
  }
  return o;
}

bool same_bytes(const fs::path& a, const fs::path& b) {
  auto read = [](const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
  };
  return fs::exists(a) && fs::exists(b) && read(a) == read(b);
}

Outcome c12() {
  Outcome o;
  {
    double worst = 0;
    ElectronBeamParams b;
    for (int n = 3; n <= 201; n += 2) {
      double s = 0;
      for (auto& e : energy_grid(b, n)) s += e.weight;
      worst = std::max(worst, std::abs(s - 1));
    }
    o.check(worst <= kWeightTol, fmt("energy-grid weight sum error %.1e (<= %.0e)", worst, kWeightTol));
  }
  {
    RunConfig cfg = config("vortex");
    const CostContext ctx(make_cost_setup(cfg, 128));
    const SliceEval e = ctx.slice(config_params(cfg));
    double mx = -INFINITY;
    for (auto& m : e.phi.maps)
      for (double v : m.data) mx = std::max(mx, v);
    o.check(mx <= 0.0, fmt("max ponderomotive phase %.3g rad (<= 0)", mx));
  }
  {
    const RunConfig ab = config("aberrated");
    const ProbeProfile p = run_probe(ab, nullptr);
    double mn = INFINITY, s = 0;
    for (double v : p.I.data) mn = std::min(mn, v), s += v;
    s *= p.pitch * p.pitch;
    o.check(mn >= 0 && std::abs(s - 1) <= kNormTol, fmt("probe min %.2g, window integral 1%+.1e", mn, s - 1));
  }
  {
    GridFile g;
    g.dims = {4, 3, 2};
    g.axis_min = {-1, -2, -3};
    g.axis_max = {1, 2, 3};
    std::mt19937_64 r(12);
    for (int i = 0; i < 24; ++i) g.real.push_back(std::bit_cast<double>(r() & 0x7fefffffffffffffULL));
    fs::create_directories("acceptance_cache");
    write_grid_file("acceptance_cache/roundtrip.plg", g);
    const GridFile h = read_grid_file("acceptance_cache/roundtrip.plg");
    o.check(h.dims == g.dims && std::memcmp(h.real.data(), g.real.data(), 24 * 8) == 0 &&
                std::memcmp(h.axis_max.data(), g.axis_max.data(), 24) == 0,
            "GridFile round-trip bit-exact");
  }
  {
    const std::string cfg = repo("tests/data/tiny.json");
    bool ok = true;
    // Same relative output path from two working directories, so the echoed
    // config is identical too.
    std::vector<std::string> dirs = {"acceptance_cache/repro_a/out", "acceptance_cache/repro_b/out"};
    for (auto& d : dirs) {
      const fs::path root = fs::path(d).parent_path();
      fs::remove_all(root);
      fs::create_directories(root);
      const std::string cmd = "cd " + root.string() + " && " + std::string(PONDEROLENS_CLI) + " pipeline -c " + cfg +
                              " -o out > /dev/null 2>&1";
      ok = ok && std::system(cmd.c_str()) == 0;
    }
    std::size_t n = 0;
    if (ok) {
      const json m = json::parse(std::ifstream(dirs[0] + "/manifest.json"));
      for (auto& f : m.at("outputs")) {
        ++n;
        ok = ok && same_bytes(fs::path(dirs[0]) / f.at("name").get<std::string>(),
                              fs::path(dirs[1]) / f.at("name").get<std::string>());
      }
      ok = ok && same_bytes(dirs[0] + "/manifest.json", dirs[1] + "/manifest.json");
    }
    o.check(ok && n > 5, fmt("pipeline bit-reproducible across two seeded runs (%zu files)", n));
  }
  return o;
}

const std::map<int, std::string> titles = {
    {1, "golden aberrated spot"},   {2, "golden target spot"},       {3, "corrected spots"},
    {4, "effective Cc"},            {5, "peak ratios"},              {6, "zoom-DFT oracle"},
    {7, "polarization matrix"},     {8, "ponderomotive analytic oracle"}, {9, "cost sanity"},
    {10, "optimizer regression"},   {11, "pulse-energy cross-check"}, {12, "property suites"}};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"acceptance criteria"};
  int only = 0;
  bool full = false, strict = false;
  std::string report = "acceptance_report.txt";
  app.add_option("--criterion", only, "run a single criterion (1-12)")->check(CLI::Range(1, 12));
  app.add_flag("--full", full, "full-scale optimizer run for criterion 10");
  app.add_flag("--strict", strict, "exit non-zero when any criterion fails");
  app.add_option("--report", report, "write result lines to this file");
  CLI11_PARSE(app, argc, argv);
  if (const char* e = std::getenv("PONDEROLENS_FULL_OPT")) full = full || std::strcmp(e, "0") != 0;

  const std::map<int, std::function<Outcome()>> table = {
      {1, c1}, {2, c2}, {3, c3}, {4, c4}, {5, c5}, {6, c6}, {7, c7}, {8, c8}, {9, c9},
      {10, [&] { return c10(full); }}, {11, c11}, {12, c12}};

  if (fs::path(report).has_parent_path()) fs::create_directories(fs::path(report).parent_path());
  std::ofstream rep(report, std::ios::trunc);
  bool all = true, crashed = false;
  for (auto& [id, fn] : table) {
    if (only && id != only) continue;
    Outcome o;
    std::string error;
    try {
      o = fn();
    } catch (const std::exception& e) {
      error = e.what();
    }
    crashed = crashed || !error.empty();
    const bool ok = error.empty() && o.ok();
    all = all && ok;
    std::ostringstream line;
    line << (ok ? "PASS" : "FAIL") << "  criterion " << id << " (" << titles.at(id) << ")";
    if (!error.empty()) line << ": error: " << error;
    for (auto& c : o.checks) line << "\n      [" << (c.ok ? "ok" : "x") << "] " << c.what;
    for (auto& s : o.info) line << "\n      info: " << s;
    std::cout << line.str() << std::endl;
    rep << line.str() << "\n";
  }
  // A criterion that could not be evaluated is a harness failure; a FAIL
  // verdict is reported, and only turns into a non-zero exit under --strict.
  if (crashed) return 2;
  return strict && !all ? 1 : 0;
}
