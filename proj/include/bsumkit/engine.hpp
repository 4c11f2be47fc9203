#pragma once

#include <chrono>
#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <vector>

#include "bsumkit/problem.hpp"
#include "bsumkit/selection.hpp"
#include "bsumkit/stepsize.hpp"
#include "bsumkit/surrogate.hpp"
#include "bsumkit/trace.hpp"

namespace bsum {

// A tolerance of 0 disables that test (comparisons are strict).
struct StopCriteria {
  std::size_t max_iters = 100000;
  double objective_rel_change_tol = 1e-10;
  double stationarity_tol = 1e-8;
  std::optional<std::chrono::duration<double>> wall_clock_limit;

  void validate() const;
};

struct EngineOptions {
  bool record_wall_time = false;
  // Iterations between stationarity-gap evaluations; unset means one sweep
  // (the rule's coverage window), 0 disables the gap.
  std::optional<std::size_t> gap_interval;
  bool detect_cycles = true;
  double cycle_grid = 1e-9;
  std::size_t cycle_window = 50;
  // A revisit only counts as a cycle if the iterate moved by at least this
  // much somewhere along the loop; the same threshold gates objective-based
  // convergence so a moving iterate with flat f keeps running.
  double min_motion = 1e-6;
  std::function<void(std::size_t, const BlockVector&)> observer;
  // Called before iteration r to adjust the per-block surrogates.
  std::function<void(std::size_t, std::vector<Surrogate>&)> surrogate_schedule;
};

struct RunResult {
  BlockVector x;
  Trace trace;
};

// Shared stopping logic for the drivers and the dedicated solver loops.
class StopMonitor {
 public:
  StopMonitor(const StopCriteria& stop, std::size_t window, double min_motion);

  // Feed iteration r (r >= 1) after the initial value was given via start().
  void start(double f0);
  std::optional<TerminalStatus> update(std::size_t r, double f, double step_norm, double x_norm,
                                       std::optional<double> gap);
  std::optional<TerminalStatus> check_wall_clock() const;
  double elapsed_ms() const;

  // Single-block rules: the objective-change window then stretches back to
  // the oldest of the blocks' latest updates, so a random rule that keeps
  // redrawing a settled block cannot stop early. Call touch() before update().
  void track_blocks(Index num_blocks);
  void touch(std::size_t r, const std::vector<Index>& blocks);

 private:
  std::size_t current_window() const;

  StopCriteria stop_;
  std::size_t window_;
  std::vector<std::size_t> last_touch_;  // 0: never updated
  double min_motion_;
  std::vector<double> f_;
  std::vector<double> steps_;
  std::chrono::steady_clock::time_point t0_;
};

RunResult run_bsum(const Problem& problem, const std::vector<Surrogate>& surrogates,
                   SelectionRule rule, const StopCriteria& stop,
                   std::optional<BlockVector> x0 = std::nullopt,
                   const EngineOptions& options = {});

RunResult run_psca(const Problem& problem, const std::vector<Surrogate>& surrogates,
                   const StepsizeSchedule& schedule, SelectionRule rule,
                   const StopCriteria& stop, std::optional<BlockVector> x0 = std::nullopt,
                   const EngineOptions& options = {});

// ---- stochastic driver ----

// 0.5 x'Qx + q'x + c on the flattened variable.
struct QuadraticModel {
  MatrixXd Q;
  VectorXd q;
  double c = 0.0;

  double value(const VectorXd& x) const { return 0.5 * x.dot(Q * x) + q.dot(x) + c; }
};

struct StochasticStream {
  SurrogateKind family = SurrogateKind::quadratic;
  std::vector<Index> dims;
  std::uint64_t seed = 0;
  // Draws a realization from rng and returns its surrogate anchored at x.
  std::function<QuadraticModel(const VectorXd& anchor, std::mt19937_64& rng)> draw;
};

struct SsumOptions {
  std::function<void(std::size_t, const BlockVector&)> observer;
  // Test hooks: each drawn surrogate and the running average after r draws.
  std::function<void(std::size_t, const QuadraticModel&)> on_draw;
  std::function<void(std::size_t, const QuadraticModel&)> on_aggregate;
  bool record_wall_time = false;
};

RunResult run_ssum(const StochasticStream& stream, const std::vector<FeasibleSet>& sets,
                   const StopCriteria& stop, std::optional<BlockVector> x0 = std::nullopt,
                   const SsumOptions& options = {});

// Sample (a, b) uniformly from the rows of a pool and bound (a'x - b)^2.
// quadratic: exact second-order model (Phi = 2aa', tight everywhere);
// proximal: (a'x - b)^2 + gamma/2 ||x - anchor||^2.
StochasticStream least_squares_stream(const MatrixXd& A, const VectorXd& b, SurrogateKind family,
                                      double gamma, std::uint64_t seed);

// ---- coupled driver ----

struct BsummResult {
  BlockVector x;
  VectorXd lambda;
  Trace trace;
};

struct BsummOptions {
  EngineOptions engine;
  std::optional<VectorXd> lambda0;
};

// One iteration = one primal pass of n rule selections, then a dual step.
BsummResult run_bsumm(const Problem& problem, const std::vector<Surrogate>& surrogates,
                      double rho, const StepsizeSchedule& dual_schedule, SelectionRule rule,
                      const StopCriteria& stop, std::optional<BlockVector> x0 = std::nullopt,
                      const BsummOptions& options = {});

// Default dual schedule alpha^r = rho.
BsummResult run_bsumm(const Problem& problem, const std::vector<Surrogate>& surrogates,
                      double rho, SelectionRule rule, const StopCriteria& stop,
                      std::optional<BlockVector> x0 = std::nullopt,
                      const BsummOptions& options = {});

double coupling_residual(const Coupling& c, const BlockVector& x);

}  // namespace bsum
