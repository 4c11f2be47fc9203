#include "bsumkit/solvers/lasso.hpp"

#include <cmath>
#include <memory>
#include <numeric>

#include "bsumkit/errors.hpp"

namespace bsum {

namespace {

void check_partition(const MatrixXd& A, const VectorXd& b, double lambda,
                     const std::vector<Index>& sizes) {
  if (A.rows() != b.size()) throw DimensionError("A has " + std::to_string(A.rows()) + " rows, b has " + std::to_string(b.size()));
  if (!(lambda >= 0.0)) throw PreconditionError("lambda must be nonnegative");
  if (sizes.empty()) throw PreconditionError("block partition is empty");
  Index total = 0;
  for (std::size_t j = 0; j < sizes.size(); ++j) {
    if (sizes[j] <= 0) throw PreconditionError("block " + std::to_string(j) + " of the partition is empty");
    total += sizes[j];
  }
  if (total != A.cols()) {
    throw PreconditionError("partition covers " + std::to_string(total) + " columns, A has " +
                            std::to_string(A.cols()));
  }
}

std::vector<Index> offsets(const std::vector<Index>& sizes) {
  std::vector<Index> off(sizes.size());
  Index acc = 0;
  for (std::size_t j = 0; j < sizes.size(); ++j) {
    off[j] = acc;
    acc += sizes[j];
  }
  return off;
}

}  // namespace

double lasso_objective(const MatrixXd& A, const VectorXd& b, double lambda, const VectorXd& x) {
  return 0.5 * (A * x - b).squaredNorm() + lambda * x.lpNorm<1>();
}

std::vector<Index> even_partition(Index n, Index blocks) {
  if (blocks <= 0 || blocks > n) throw PreconditionError("cannot split " + std::to_string(n) + " columns into " + std::to_string(blocks) + " blocks");
  std::vector<Index> sizes(static_cast<std::size_t>(blocks), n / blocks);
  for (Index k = 0; k < n % blocks; ++k) ++sizes[static_cast<std::size_t>(k)];
  return sizes;
}

std::vector<double> lasso_block_lipschitz(const MatrixXd& A, const std::vector<Index>& sizes) {
  const auto off = offsets(sizes);
  std::vector<double> L(sizes.size());
  for (std::size_t j = 0; j < sizes.size(); ++j) {
    const auto Aj = A.middleCols(off[j], sizes[j]);
    const MatrixXd G = Aj.transpose() * Aj;
    const double top = Eigen::SelfAdjointEigenSolver<MatrixXd>(G, Eigen::EigenvaluesOnly).eigenvalues().maxCoeff();
    L[j] = 1.01 * std::max(top, 1e-12);
  }
  return L;
}

Problem make_lasso_problem(const MatrixXd& A, const VectorXd& b, double lambda,
                           const std::vector<Index>& sizes) {
  check_partition(A, b, lambda, sizes);
  Problem p = make_problem("lasso", sizes);
  auto Ap = std::make_shared<const MatrixXd>(A);
  auto bp = std::make_shared<const VectorXd>(b);
  const auto off = offsets(sizes);
  p.smooth = [Ap, bp](const BlockVector& x) { return 0.5 * (*Ap * x.flat() - *bp).squaredNorm(); };
  p.gradient = [Ap, bp, off, sizes](const BlockVector& x, Index i) -> VectorXd {
    const VectorXd r = *Ap * x.flat() - *bp;
    const auto ui = static_cast<std::size_t>(i);
    return Ap->middleCols(off[ui], sizes[ui]).transpose() * r;
  };
  for (auto& h : p.nonsmooth) h = Nonsmooth::l1(lambda);
  return p;
}

LassoResult lasso_bcpg(const MatrixXd& A, const VectorXd& b, double lambda,
                       const std::vector<Index>& sizes, SelectionRule rule,
                       const StopCriteria& stop, const LassoOptions& options) {
  check_partition(A, b, lambda, sizes);
  stop.validate();
  const auto nb = static_cast<Index>(sizes.size());
  if (rule.num_blocks() != nb) {
    throw DimensionError("selection rule covers " + std::to_string(rule.num_blocks()) +
                         " blocks, partition has " + std::to_string(nb));
  }
  const auto off = offsets(sizes);
  LassoResult out;
  out.lipschitz = lasso_block_lipschitz(A, sizes);
  VectorXd x = options.x0 ? *options.x0 : VectorXd::Zero(A.cols());
  if (x.size() != A.cols()) throw DimensionError("start point has the wrong length");
  VectorXd res = A * x - b;  // kept in sync with x
  double l1 = x.lpNorm<1>();
  auto objective = [&]() { return 0.5 * res.squaredNorm() + lambda * l1; };
  auto block_candidate = [&](std::size_t j) -> VectorXd {
    const auto Aj = A.middleCols(off[j], sizes[j]);
    const VectorXd xj = x.segment(off[j], sizes[j]);
    return soft_threshold(xj - (Aj.transpose() * res) / out.lipschitz[j], lambda / out.lipschitz[j]);
  };
  auto full_gap = [&]() { return (x - soft_threshold(x - A.transpose() * res, lambda)).norm(); };

  const std::size_t gap_every =
      options.gap_interval ? *options.gap_interval : static_cast<std::size_t>(rule.coverage_window());
  const std::size_t window = rule.single_block() ? static_cast<std::size_t>(nb) : 1;
  StopMonitor monitor(stop, window, 1e-6);
  if (rule.single_block()) monitor.track_blocks(nb);
  double f = objective();
  monitor.start(f);
  {
    TraceRecord rec;
    rec.r = 0;
    rec.f = f;
    if (gap_every > 0) rec.stat_gap = full_gap();
    if (options.record_wall_time) rec.wall_ms = 0.0;
    out.trace.records.push_back(rec);
  }

  for (std::size_t r = 1;; ++r) {
    Candidates cand;
    std::vector<VectorXd> cache;
    if (rule.needs_step_norms() || rule.needs_objectives()) {
      cache.resize(sizes.size());
      for (std::size_t j = 0; j < sizes.size(); ++j) {
        cache[j] = block_candidate(j);
        const VectorXd d = cache[j] - x.segment(off[j], sizes[j]);
        if (rule.needs_step_norms()) cand.step_norms.push_back(d.norm());
        if (rule.needs_objectives()) {
          const VectorXd rj = res + A.middleCols(off[j], sizes[j]) * d;
          const double l1j = l1 - x.segment(off[j], sizes[j]).lpNorm<1>() + cache[j].lpNorm<1>();
          cand.objectives.push_back(0.5 * rj.squaredNorm() + lambda * l1j);
        }
      }
    }
    const auto chosen = rule.select(r - 1, &cand);
    // All chosen candidates come from x^{r-1}.
    std::vector<VectorXd> updates;
    for (Index i : chosen) {
      const auto j = static_cast<std::size_t>(i);
      updates.push_back(cache.empty() ? block_candidate(j) : cache[j]);
    }
    double step_sq = 0.0;
    for (std::size_t k = 0; k < chosen.size(); ++k) {
      const auto j = static_cast<std::size_t>(chosen[k]);
      const VectorXd d = updates[k] - x.segment(off[j], sizes[j]);
      step_sq += d.squaredNorm();
      if (d.squaredNorm() == 0.0) continue;
      res.noalias() += A.middleCols(off[j], sizes[j]) * d;
      l1 += updates[k].lpNorm<1>() - x.segment(off[j], sizes[j]).lpNorm<1>();
      x.segment(off[j], sizes[j]) = updates[k];
    }
    f = objective();

    TraceRecord rec;
    rec.r = r;
    rec.blocks = chosen;
    rec.f = f;
    rec.step_norm = std::sqrt(step_sq);
    if (gap_every > 0 && r % gap_every == 0) {
      // Refresh the cached residual and l1 to stop drift from accumulating.
      res = A * x - b;
      l1 = x.lpNorm<1>();
      rec.stat_gap = full_gap();
    }
    if (options.record_wall_time) rec.wall_ms = monitor.elapsed_ms();
    out.trace.records.push_back(rec);
    monitor.touch(r, chosen);
    if (auto st = monitor.update(r, f, rec.step_norm, x.norm(), rec.stat_gap)) {
      out.trace.status = *st;
      break;
    }
  }
  out.x = x;
  return out;
}

}  // namespace bsum
