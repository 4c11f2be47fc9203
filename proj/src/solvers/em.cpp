#include "bsumkit/solvers/em.hpp"

#include <cmath>

#include "bsumkit/errors.hpp"

namespace bsum {

namespace {

void check_alpha(const MatrixXd& alpha) {
  if (alpha.size() == 0) throw DimensionError("compatibility matrix is empty");
  if (!alpha.allFinite() || alpha.minCoeff() < 0.0) {
    throw PreconditionError("compatibility matrix must be finite and nonnegative");
  }
  for (Index n = 0; n < alpha.rows(); ++n) {
    if (!(alpha.row(n).maxCoeff() > 0.0)) {
      throw DegenerateInstance("read " + std::to_string(n + 1) + " (row " + std::to_string(n) +
                               ") is compatible with no candidate");
    }
  }
}

}  // namespace

double em_negative_log_likelihood(const MatrixXd& alpha, const VectorXd& rho) {
  const VectorXd mix = alpha * rho;
  double f = 0.0;
  for (Index n = 0; n < mix.size(); ++n) f -= std::log(mix[n]);
  return f;
}

VectorXd em_update(const MatrixXd& alpha, const VectorXd& rho) {
  const VectorXd mix = alpha * rho;
  if (!(mix.minCoeff() > 0.0)) throw DegenerateInstance("a read has zero likelihood under rho");
  const VectorXd back = alpha.transpose() * mix.cwiseInverse();
  VectorXd next = rho.cwiseProduct(back) / static_cast<double>(alpha.rows());
  // Each update sums to one up to rounding; renormalize to keep it exact.
  return next / next.sum();
}

EmResult em_abundance(const MatrixXd& alpha, const VectorXd& rho0, const StopCriteria& stop,
                      const EmOptions& options) {
  check_alpha(alpha);
  stop.validate();
  const Index M = alpha.cols();
  if (rho0.size() != M) throw DimensionError("rho0 has the wrong length");
  if (!(rho0.minCoeff() > 0.0) || std::abs(rho0.sum() - 1.0) > 1e-12) {
    throw PreconditionError("rho0 must be strictly positive and sum to one");
  }
  const FeasibleSet simplex = FeasibleSet::simplex(M);
  const double N = static_cast<double>(alpha.rows());
  auto gap_at = [&](const VectorXd& rho) {
    const VectorXd grad = -(alpha.transpose() * (alpha * rho).cwiseInverse());
    // Scale by 1/N so the residual does not grow with the read count.
    return (rho - simplex.project(rho - grad / N)).norm();
  };

  EmResult out;
  VectorXd rho = rho0;
  double f = em_negative_log_likelihood(alpha, rho);
  StopMonitor monitor(stop, 1, 1e-6);
  monitor.start(f);
  out.trace.records.push_back(TraceRecord{0, {0}, f, 0.0, gap_at(rho), std::nullopt, std::nullopt});
  if (options.observer) options.observer(0, rho);

  for (std::size_t r = 1;; ++r) {
    const VectorXd next = em_update(alpha, rho);
    const double moved = (next - rho).lpNorm<1>();
    const double step = (next - rho).norm();
    rho = next;
    f = em_negative_log_likelihood(alpha, rho);
    TraceRecord rec{r, {0}, f, step, gap_at(rho), std::nullopt, std::nullopt};
    out.trace.records.push_back(rec);
    if (options.observer) options.observer(r, rho);
    if (moved < options.fixed_point_tol) {
      out.trace.status = TerminalStatus::converged;
      break;
    }
    if (auto st = monitor.update(r, f, step, rho.norm(), rec.stat_gap)) {
      out.trace.status = *st;
      break;
    }
  }
  out.model = AbundanceModel{alpha, rho};
  return out;
}

}  // namespace bsum
