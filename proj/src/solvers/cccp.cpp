#include "bsumkit/solvers/cccp.hpp"

#include <cmath>

#include "bsumkit/errors.hpp"

namespace bsum {

namespace {

// Armijo gradient descent on g(x) - <c, x>.
VectorXd tilted_descent(const ConvexPart& g, const VectorXd& c, const VectorXd& warm,
                        const InnerSolverBudget& budget) {
  if (!g.gradient) throw UnsupportedOperation("CCCP fallback needs the gradient of g1");
  auto phi = [&](const VectorXd& v) { return g.value(v) - c.dot(v); };
  const double far = 1e8 * (1.0 + warm.norm());
  VectorXd x = warm;
  double fx = phi(x);
  double t = 1.0;
  for (int it = 0; it < budget.max_iters; ++it) {
    const VectorXd d = g.gradient(x) - c;
    const double dn = d.norm();
    if (dn <= budget.tolerance * std::max(1.0, x.norm())) return x;
    VectorXd y;
    double fy = 0.0;
    t *= 2.0;
    for (int k = 0; k < 200; ++k) {
      y = x - t * d;
      fy = phi(y);
      if (std::isfinite(fy) && fy <= fx - 0.5 * t * dn * dn) break;
      t *= 0.5;
    }
    if (!(fy <= fx)) return x;
    x = y;
    fx = fy;
    if (x.norm() > far || !std::isfinite(fx)) {
      throw DivergenceError("CCCP subproblem is unbounded below: iterate norm " +
                            std::to_string(x.norm()) + ", value " + std::to_string(fx));
    }
  }
  return x;
}

}  // namespace

CccpResult cccp_minimize(const ConvexPart& g1, const ConvexPart& g2, const VectorXd& x0,
                         const StopCriteria& stop, const CccpOptions& options) {
  stop.validate();
  if (!g1.value || !g2.value || !g2.gradient) {
    throw PreconditionError("CCCP needs values of g1 and g2 and the gradient of g2");
  }
  auto f = [&](const VectorXd& v) { return g1.value(v) - g2.value(v); };
  auto gap_at = [&](const VectorXd& v) -> std::optional<double> {
    if (!g1.gradient) return std::nullopt;
    return (g1.gradient(v) - g2.gradient(v)).norm();
  };

  CccpResult out;
  VectorXd x = x0;
  double fx = f(x);
  if (!std::isfinite(fx)) throw InfeasibleError("CCCP start point has a non-finite objective");
  StopMonitor monitor(stop, 1, 1e-6);
  monitor.start(fx);
  out.trace.records.push_back(TraceRecord{0, {0}, fx, 0.0, gap_at(x), std::nullopt, std::nullopt});
  if (options.observer) options.observer(0, x);

  for (std::size_t r = 1;; ++r) {
    const VectorXd c = g2.gradient(x);
    VectorXd next = g1.tilted_argmin ? g1.tilted_argmin(c, x) : tilted_descent(g1, c, x, options.inner);
    if (next.size() != x.size()) throw DimensionError("CCCP subproblem returned the wrong length");
    if (!next.allFinite()) throw DivergenceError("CCCP subproblem has no finite minimizer");
    const double step = (next - x).norm();
    x = next;
    fx = f(x);
    TraceRecord rec{r, {0}, fx, step, gap_at(x), std::nullopt, std::nullopt};
    out.trace.records.push_back(rec);
    if (options.observer) options.observer(r, x);
    if (auto st = monitor.update(r, fx, step, x.norm(), rec.stat_gap)) {
      out.trace.status = *st;
      break;
    }
  }
  out.x = x;
  return out;
}

}  // namespace bsum
