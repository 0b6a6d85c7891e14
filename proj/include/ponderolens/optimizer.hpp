#pragma once
#include <cmath>
#include <functional>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "errors.hpp"
#include "parallel.hpp"
#include "rng.hpp"

namespace ponderolens {

struct OptimizerConfig {
  int n_restarts = 16;
  std::vector<std::pair<double, double>> init_ranges;
  double lr0 = 0.05;
  double momentum = 0.9;
  double fd_step = 1e-3;
  double fd_floor = 1e-4;
  double lr_floor = 0.1;       ///< magnitude floor of the proportional learning rate
  double backoff = 0.5;        ///< step multiplier applied after a rejected step
  int stagnation_window = 25;
  double stagnation_tol = 1e-4;
  int max_iters = 600;
  bool optimize_defocus = false;

  void validate() const {
    if (n_restarts < 1) throw ConfigError("optimizer.n_restarts must be >= 1");
    if (!(momentum >= 0 && momentum < 1)) throw ConfigError("optimizer.momentum must be in [0, 1)");
    if (max_iters < 1) throw ConfigError("optimizer.max_iters must be >= 1");
    if (!(lr0 > 0)) throw ConfigError("optimizer.lr0 must be > 0");
    if (!(fd_step > 0) || !(fd_floor > 0)) throw ConfigError("optimizer: fd_step and fd_floor must be > 0");
    if (!(backoff > 0 && backoff < 1)) throw ConfigError("optimizer.backoff must be in (0, 1)");
    if (stagnation_window < 1) throw ConfigError("optimizer.stagnation_window must be >= 1");
    for (auto& [lo, hi] : init_ranges)
      if (!(hi >= lo)) throw ConfigError("optimizer.init_ranges: high must be >= low");
  }
};

struct TracePoint {
  int iteration;
  double cost;       ///< cost at the current iterate
  double best_cost;  ///< best so far in this restart
  std::vector<double> params;
};

struct RestartTrace {
  std::vector<TracePoint> points;
  bool diverged = false;
  std::string stop_reason;
};

struct OptResult {
  std::vector<double> best_params;
  double best_cost = std::numeric_limits<double>::infinity();
  int best_restart = -1;
  std::vector<RestartTrace> traces;
  long evaluations = 0;
};

/// Raised when no restart produced a finite cost; carries the traces.
struct OptimizationFailure : OptimizationError {
  OptResult result;
  explicit OptimizationFailure(OptResult r)
      : OptimizationError("optimize: every restart diverged"), result(std::move(r)) {}
};

using Objective = std::function<double(const std::vector<double>&)>;

/// Central finite-difference gradient with relative steps.
inline std::vector<double> fd_gradient(const Objective& f, const std::vector<double>& p,
                                       double rel, double floor, long* evals = nullptr) {
  std::vector<double> g(p.size());
  std::vector<double> q = p;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double h = rel * std::max(std::abs(p[i]), floor);
    q[i] = p[i] + h;
    const double fp = f(q);
    q[i] = p[i] - h;
    const double fm = f(q);
    q[i] = p[i];
    g[i] = (fp - fm) / (2.0 * h);
  }
  if (evals) *evals += 2 * long(p.size());
  return g;
}

namespace detail {
inline RestartTrace run_restart(const OptimizerConfig& cfg, const Objective& f,
                                std::vector<double> p, long& evals) {
  RestartTrace tr;
  const std::size_t n = p.size();
  std::vector<double> v(n, 0.0);
  double c = f(p);
  ++evals;
  if (!std::isfinite(c)) {
    tr.diverged = true;
    tr.stop_reason = "non-finite initial cost";
    tr.points.push_back({0, c, c, p});
    return tr;
  }
  double best = c, mult = 1.0;
  tr.points.push_back({0, c, best, p});
  tr.stop_reason = "max_iters";
  for (int it = 1; it <= cfg.max_iters; ++it) {
    const auto g = fd_gradient(f, p, cfg.fd_step, cfg.fd_floor, &evals);
    std::vector<double> trial(n);
    for (std::size_t i = 0; i < n; ++i) {
      const double lr = cfg.lr0 * mult * std::max(std::abs(p[i]), cfg.lr_floor);
      v[i] = cfg.momentum * v[i] - lr * g[i];
      trial[i] = p[i] + v[i];
    }
    const double ct = f(trial);
    ++evals;
    if (std::isfinite(ct) && ct <= c) {
      p = std::move(trial);
      c = ct;
      mult = std::min(1.0, mult * 1.5);
    } else {
      // Rejected: shrink the step and drop the accumulated velocity.
      mult *= cfg.backoff;
      std::fill(v.begin(), v.end(), 0.0);
    }
    best = std::min(best, c);
    tr.points.push_back({it, c, best, p});
    if (mult < 1e-8) {
      tr.stop_reason = "step collapsed";
      break;
    }
    const int w = cfg.stagnation_window;
    if (it >= w) {
      const double old = tr.points[std::size_t(it - w)].best_cost;
      if (old - best < cfg.stagnation_tol * std::abs(old)) {
        tr.stop_reason = "stagnation";
        break;
      }
    }
  }
  return tr;
}
}  // namespace detail

/// Multi-restart momentum descent. Restart r draws its start from
/// derive_seed(seed, "optimizer/restart/<r>").
inline OptResult optimize(const OptimizerConfig& cfg, const Objective& f, std::uint64_t seed) {
  cfg.validate();
  if (cfg.init_ranges.empty()) throw ConfigError("optimizer.init_ranges is empty");
  OptResult res;
  res.traces.resize(std::size_t(cfg.n_restarts));
  std::vector<long> evals(std::size_t(cfg.n_restarts), 0);
  parallel_for(std::size_t(cfg.n_restarts), [&](std::size_t r, int) {
    std::mt19937_64 g(derive_seed(seed, "optimizer/restart/" + std::to_string(r)));
    std::vector<double> p;
    for (auto& [lo, hi] : cfg.init_ranges) p.push_back(uniform(g, lo, hi));
    res.traces[r] = detail::run_restart(cfg, f, p, evals[r]);
  });
  for (std::size_t r = 0; r < res.traces.size(); ++r) {
    res.evaluations += evals[r];
    for (auto& pt : res.traces[r].points)
      if (std::isfinite(pt.cost) && pt.cost < res.best_cost) {
        res.best_cost = pt.cost;
        res.best_params = pt.params;
        res.best_restart = int(r);
      }
  }
  if (res.best_restart < 0) throw OptimizationFailure(std::move(res));
  return res;
}

}  // namespace ponderolens
