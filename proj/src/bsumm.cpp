#include <algorithm>
#include <cmath>
#include <random>

#include "bsumkit/engine.hpp"
#include "bsumkit/errors.hpp"

namespace bsum {

double coupling_residual(const Coupling& c, const BlockVector& x) {
  VectorXd r = -c.b;
  for (std::size_t i = 0; i < c.A.size(); ++i) r += c.A[i] * x.block(static_cast<Index>(i));
  return r.norm();
}

namespace {

VectorXd coupling_sum(const Coupling& c, const BlockVector& x) {
  VectorXd s = VectorXd::Zero(c.b.size());
  for (std::size_t i = 0; i < c.A.size(); ++i) s += c.A[i] * x.block(static_cast<Index>(i));
  return s;
}

// Midpoint test on random segments around x; catches obvious nonconvexity.
bool looks_nonconvex(const Problem& problem, const BlockVector& x) {
  std::mt19937_64 rng(12345);
  std::normal_distribution<double> gauss(0.0, 1.0);
  for (int k = 0; k < 16; ++k) {
    VectorXd u(x.total_dim()), v(x.total_dim());
    for (Index j = 0; j < u.size(); ++j) {
      u[j] = gauss(rng);
      v[j] = gauss(rng);
    }
    const BlockVector a = problem.project(BlockVector(x.dims(), x.flat() + u));
    const BlockVector b = problem.project(BlockVector(x.dims(), x.flat() + v));
    const BlockVector mid(x.dims(), 0.5 * (a.flat() + b.flat()));
    const double fa = eval_objective(problem, a), fb = eval_objective(problem, b);
    const double fm = eval_objective(problem, mid);
    if (fm > 0.5 * (fa + fb) + 1e-9 * std::max(1.0, std::abs(fa) + std::abs(fb))) return true;
  }
  return false;
}

VectorXd primal_block_update(const Surrogate& s, const Problem& problem, const Coupling& cp,
                             Index i, const BlockVector& x, const VectorXd& lambda, double rho) {
  const auto ui = static_cast<std::size_t>(i);
  const MatrixXd& Ai = cp.A[ui];
  if (Ai.isZero(0.0)) {
    // Coupling terms vanish for this block.
    return minimize_block_surrogate(s, problem, i, x);
  }
  const VectorXd c = coupling_sum(cp, x) - Ai * x.block(i) - cp.b;
  SmoothModel base = surrogate_smooth_model(s, problem, i, x);
  SmoothModel aug;
  aug.value = [base, Ai, c, lambda, rho](const VectorXd& y) {
    const VectorXd r = Ai * y + c;
    return base.value(y) + lambda.dot(Ai * y) + 0.5 * rho * r.squaredNorm();
  };
  aug.gradient = [base, Ai, c, lambda, rho](const VectorXd& y) -> VectorXd {
    return base.gradient(y) + Ai.transpose() * (lambda + rho * (Ai * y + c));
  };
  const double an = Ai.operatorNorm();
  aug.curvature_hint = base.curvature_hint + rho * an * an;
  const auto& h = problem.nonsmooth[ui];
  const auto& set = problem.sets[ui];
  if (!prox_onto_available(h, set)) {
    throw UnsupportedOperation("BSUMM block " + std::to_string(i) +
                               " needs a closed-form proximal map over its set");
  }
  return inner_prox_gradient(aug, h, set, VectorXd(x.block(i)), s.budget).x;
}

}  // namespace

BsummResult run_bsumm(const Problem& problem, const std::vector<Surrogate>& surrogates,
                      double rho, const StepsizeSchedule& dual_schedule, SelectionRule rule,
                      const StopCriteria& stop, std::optional<BlockVector> x0,
                      const BsummOptions& options) {
  problem.validate();
  stop.validate();
  if (!problem.coupling) {
    throw PreconditionError("problem '" + problem.name + "' has no coupling; use run_bsum");
  }
  if (!(rho > 0.0)) throw PreconditionError("BSUMM needs rho > 0");
  if (rule.num_blocks() != problem.num_blocks()) {
    throw DimensionError("selection rule does not match the number of blocks");
  }
  const Coupling& cp = *problem.coupling;
  const auto surr = per_block(surrogates, problem.num_blocks());
  BlockVector x = x0 ? *x0 : problem.project(problem.zeros());
  if (!problem.is_feasible(x, 1e-10)) throw InfeasibleError("start point is infeasible");
  VectorXd lambda = options.lambda0 ? *options.lambda0 : VectorXd::Zero(cp.b.size());
  if (lambda.size() != cp.b.size()) throw DimensionError("dual start has the wrong length");

  BsummResult out{x, lambda, Trace{}};
  Trace& trace = out.trace;
  if (looks_nonconvex(problem, x)) {
    trace.notes.push_back("objective failed a sampled convexity test; BSUMM guarantees assume convex f");
  }
  StopMonitor clock(stop, 1, 0.0);
  double f = eval_objective(problem, x);
  clock.start(f);
  {
    TraceRecord rec;
    rec.r = 0;
    rec.f = f;
    rec.feas_residual = coupling_residual(cp, x);
    if (options.engine.record_wall_time) rec.wall_ms = 0.0;
    trace.records.push_back(rec);
  }
  if (options.engine.observer) options.engine.observer(0, x);

  std::size_t counter = 0;
  const auto n = static_cast<std::size_t>(problem.num_blocks());
  for (std::size_t r = 1;; ++r) {
    const VectorXd before = x.flat();
    std::vector<Index> touched;
    for (std::size_t k = 0; k < n; ++k) {
      const auto chosen = rule.select(counter++);
      for (Index i : chosen) {
        x.block(i) = primal_block_update(surr[static_cast<std::size_t>(i)], problem, cp, i, x,
                                         lambda, rho);
        touched.push_back(i);
      }
      if (!rule.single_block()) break;
    }
    const double alpha = dual_schedule.at(r);
    lambda += alpha * (coupling_sum(cp, x) - cp.b);
    const double f_prev = f;
    f = eval_objective(problem, x);
    const double res = coupling_residual(cp, x);

    TraceRecord rec;
    rec.r = r;
    rec.blocks = touched;
    rec.f = f;
    rec.step_norm = (x.flat() - before).norm();
    rec.feas_residual = res;
    if (options.engine.record_wall_time) rec.wall_ms = clock.elapsed_ms();
    trace.records.push_back(rec);
    if (options.engine.observer) options.engine.observer(r, x);

    if (!std::isfinite(f) || !x.flat().allFinite()) {
      trace.notes.push_back("iterate diverged (non-finite value) at r=" + std::to_string(r));
      trace.status = TerminalStatus::budget;
      break;
    }
    const bool flat = std::abs(f - f_prev) < stop.objective_rel_change_tol * std::max(1.0, std::abs(f));
    if (flat && res < stop.stationarity_tol) {
      trace.status = TerminalStatus::converged;
      break;
    }
    if (auto w = clock.check_wall_clock()) {
      trace.status = *w;
      break;
    }
    if (r >= stop.max_iters) {
      trace.status = TerminalStatus::max_iters;
      break;
    }
  }
  out.x = x;
  out.lambda = lambda;
  return out;
}

BsummResult run_bsumm(const Problem& problem, const std::vector<Surrogate>& surrogates,
                      double rho, SelectionRule rule, const StopCriteria& stop,
                      std::optional<BlockVector> x0, const BsummOptions& options) {
  return run_bsumm(problem, surrogates, rho, StepsizeSchedule::constant(rho), std::move(rule), stop,
                   std::move(x0), options);
}

}  // namespace bsum
