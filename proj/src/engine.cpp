#include "bsumkit/engine.hpp"

#include <algorithm>
#include <climits>
#include <cmath>
#include <cstdio>
#include <deque>
#include <limits>
#include <map>

#include "bsumkit/diagnostics.hpp"
#include "bsumkit/errors.hpp"

namespace bsum {

void StopCriteria::validate() const {
  const bool any = max_iters > 0 || objective_rel_change_tol > 0.0 || stationarity_tol > 0.0 ||
                   wall_clock_limit.has_value();
  if (!any) throw PreconditionError("stop criteria: at least one criterion must be finite");
  if (objective_rel_change_tol < 0.0 || stationarity_tol < 0.0) {
    throw PreconditionError("stop criteria: tolerances must be nonnegative");
  }
  if (max_iters == 0) throw PreconditionError("stop criteria: max_iters must be positive");
}

StopMonitor::StopMonitor(const StopCriteria& stop, std::size_t window, double min_motion)
    : stop_(stop), window_(std::max<std::size_t>(window, 1)), min_motion_(min_motion),
      t0_(std::chrono::steady_clock::now()) {
  stop_.validate();
}

void StopMonitor::start(double f0) {
  f_.assign(1, f0);
  steps_.clear();
  t0_ = std::chrono::steady_clock::now();
}

double StopMonitor::elapsed_ms() const {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0_).count();
}

std::optional<TerminalStatus> StopMonitor::check_wall_clock() const {
  if (stop_.wall_clock_limit &&
      std::chrono::steady_clock::now() - t0_ >= *stop_.wall_clock_limit) {
    return TerminalStatus::budget;
  }
  return std::nullopt;
}

void StopMonitor::track_blocks(Index num_blocks) {
  last_touch_.assign(static_cast<std::size_t>(num_blocks), 0);
}

void StopMonitor::touch(std::size_t r, const std::vector<Index>& blocks) {
  for (Index i : blocks) {
    if (static_cast<std::size_t>(i) < last_touch_.size()) last_touch_[static_cast<std::size_t>(i)] = r;
  }
}

std::size_t StopMonitor::current_window() const {
  if (last_touch_.empty()) return window_;
  const std::size_t oldest = *std::min_element(last_touch_.begin(), last_touch_.end());
  if (oldest == 0) return 0;  // some block not yet visited
  return std::max(window_, steps_.size() - oldest + 1);
}

std::optional<TerminalStatus> StopMonitor::update(std::size_t r, double f, double step_norm,
                                                  double x_norm, std::optional<double> gap) {
  f_.push_back(f);
  steps_.push_back(step_norm);
  if (gap && *gap < stop_.stationarity_tol) return TerminalStatus::converged;
  const std::size_t window = current_window();
  if (window > 0 && f_.size() > window) {
    const double prev = f_[f_.size() - 1 - window];
    const double change = std::abs(prev - f);
    double moved = 0.0;
    for (std::size_t k = steps_.size() - window; k < steps_.size(); ++k) {
      moved = std::max(moved, steps_[k]);
    }
    if (change < stop_.objective_rel_change_tol * std::max(1.0, std::abs(f)) &&
        moved < min_motion_ * std::max(1.0, x_norm)) {
      return TerminalStatus::converged;
    }
  }
  if (auto w = check_wall_clock()) return w;
  if (r >= stop_.max_iters) return TerminalStatus::max_iters;
  return std::nullopt;
}

namespace {

std::string grid_text(double g) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", g);
  return buf;
}

struct CycleDetector {
  double grid;
  std::size_t window;
  double min_motion;
  struct Entry {
    std::vector<long long> key;
    VectorXd x;
    double step;  // step that produced this iterate
  };
  std::deque<Entry> hist;

  std::vector<long long> key_of(const VectorXd& x) const {
    std::vector<long long> k(static_cast<std::size_t>(x.size()));
    for (Index j = 0; j < x.size(); ++j) {
      const double v = std::round(x[j] / grid);
      k[static_cast<std::size_t>(j)] =
          std::abs(v) < 9e18 ? static_cast<long long>(v) : (v > 0 ? LLONG_MAX : LLONG_MIN);
    }
    return k;
  }

  // Returns the loop (in visiting order) when x closes one.
  std::optional<std::vector<VectorXd>> push(const VectorXd& x, double step) {
    if (!x.allFinite()) return std::nullopt;
    auto key = key_of(x);
    std::optional<std::vector<VectorXd>> loop;
    for (std::size_t k = hist.size(); k-- > 0;) {
      if (hist[k].key != key) continue;
      double moved = step;
      for (std::size_t j = k + 1; j < hist.size(); ++j) moved = std::max(moved, hist[j].step);
      if (moved >= min_motion) {
        std::vector<VectorXd> pts;
        for (std::size_t j = k + 1; j < hist.size(); ++j) pts.push_back(hist[j].x);
        pts.push_back(x);
        loop = std::move(pts);
      }
      break;
    }
    hist.push_back(Entry{std::move(key), x, step});
    if (hist.size() > window + 1) hist.pop_front();
    return loop;
  }
};

std::size_t resolve_gap_interval(const EngineOptions& o, const SelectionRule& rule) {
  if (o.gap_interval) return *o.gap_interval;
  return static_cast<std::size_t>(rule.coverage_window());
}

RunResult run_driver(const Problem& problem, const std::vector<Surrogate>& surrogates_in,
                     const StepsizeSchedule* schedule, SelectionRule rule,
                     const StopCriteria& stop, std::optional<BlockVector> x0,
                     const EngineOptions& options) {
  problem.validate();
  stop.validate();
  if (problem.coupling) {
    throw PreconditionError("problem '" + problem.name +
                            "' has linear coupling; use run_bsumm (or a coupled_slice_view)");
  }
  if (rule.num_blocks() != problem.num_blocks()) {
    throw DimensionError("selection rule covers " + std::to_string(rule.num_blocks()) +
                         " blocks, problem has " + std::to_string(problem.num_blocks()));
  }
  std::vector<Surrogate> surr = per_block(surrogates_in, problem.num_blocks());
  BlockVector x = x0 ? *x0 : problem.project(problem.zeros());
  problem.check_point(x);
  if (!problem.is_feasible(x, 1e-10)) throw InfeasibleError("start point is infeasible");

  const std::size_t gap_every = resolve_gap_interval(options, rule);
  const std::size_t window = rule.single_block() ? static_cast<std::size_t>(problem.num_blocks()) : 1;
  StopMonitor monitor(stop, window, options.min_motion);
  if (rule.single_block()) monitor.track_blocks(problem.num_blocks());
  CycleDetector cycles{options.cycle_grid, options.cycle_window, options.min_motion, {}};

  RunResult out{x, Trace{}};
  Trace& trace = out.trace;
  double f = eval_objective(problem, x);
  monitor.start(f);
  {
    TraceRecord rec;
    rec.r = 0;
    rec.f = f;
    if (gap_every > 0) rec.stat_gap = prox_residual(problem, x);
    if (options.record_wall_time) rec.wall_ms = 0.0;
    trace.records.push_back(rec);
  }
  if (options.detect_cycles) cycles.push(x.flat(), 0.0);
  if (options.observer) options.observer(0, x);

  for (std::size_t r = 1;; ++r) {
    if (options.surrogate_schedule) options.surrogate_schedule(r, surr);

    Candidates cand;
    std::vector<VectorXd> cache(static_cast<std::size_t>(problem.num_blocks()));
    std::vector<bool> cached(static_cast<std::size_t>(problem.num_blocks()), false);
    if (rule.needs_step_norms() || rule.needs_objectives()) {
      for (Index i = 0; i < problem.num_blocks(); ++i) {
        const auto ui = static_cast<std::size_t>(i);
        cache[ui] = minimize_block_surrogate(surr[ui], problem, i, x);
        cached[ui] = true;
        if (rule.needs_step_norms()) cand.step_norms.push_back((cache[ui] - x.block(i)).norm());
        if (rule.needs_objectives()) {
          cand.objectives.push_back(eval_objective(problem, x.with_block(i, cache[ui])));
        }
      }
    }
    const std::vector<Index> chosen = rule.select(r - 1, &cand);
    const double gamma = schedule ? schedule->at_unit(r) : 1.0;

    // Every chosen block is computed from x^{r-1}, then merged by index.
    BlockVector next = x;
    for (Index i : chosen) {
      const auto ui = static_cast<std::size_t>(i);
      const VectorXd xhat = cached[ui] ? cache[ui] : minimize_block_surrogate(surr[ui], problem, i, x);
      if (gamma == 1.0) {
        next.block(i) = xhat;
      } else {
        next.block(i) = x.block(i) + gamma * (xhat - x.block(i));
      }
    }
    const double step = (next.flat() - x.flat()).norm();
    x = std::move(next);
    f = eval_objective(problem, x);

    TraceRecord rec;
    rec.r = r;
    rec.blocks = chosen;
    rec.f = f;
    rec.step_norm = step;
    if (gap_every > 0 && r % gap_every == 0) rec.stat_gap = prox_residual(problem, x);
    if (options.record_wall_time) rec.wall_ms = monitor.elapsed_ms();
    trace.records.push_back(rec);
    if (options.observer) options.observer(r, x);

    if (!std::isfinite(f) || !x.flat().allFinite()) {
      trace.notes.push_back("iterate diverged (non-finite value) at r=" + std::to_string(r));
      trace.status = TerminalStatus::budget;
      break;
    }
    if (options.detect_cycles) {
      if (auto loop = cycles.push(x.flat(), step)) {
        trace.cycle = std::move(*loop);
        trace.notes.push_back("iterate revisited within grid " + grid_text(options.cycle_grid) +
                              "; period " + std::to_string(trace.cycle.size()));
        trace.status = TerminalStatus::detected_cycle;
        break;
      }
    }
    monitor.touch(r, chosen);
    if (auto st = monitor.update(r, f, step, x.flat().norm(), rec.stat_gap)) {
      trace.status = *st;
      break;
    }
  }
  out.x = x;
  return out;
}

}  // namespace

RunResult run_bsum(const Problem& problem, const std::vector<Surrogate>& surrogates,
                   SelectionRule rule, const StopCriteria& stop, std::optional<BlockVector> x0,
                   const EngineOptions& options) {
  return run_driver(problem, surrogates, nullptr, std::move(rule), stop, std::move(x0), options);
}

RunResult run_psca(const Problem& problem, const std::vector<Surrogate>& surrogates,
                   const StepsizeSchedule& schedule, SelectionRule rule, const StopCriteria& stop,
                   std::optional<BlockVector> x0, const EngineOptions& options) {
  return run_driver(problem, surrogates, &schedule, std::move(rule), stop, std::move(x0), options);
}

}  // namespace bsum
