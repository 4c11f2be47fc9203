#include <algorithm>
#include <cmath>
#include <limits>

#include "bsumkit/engine.hpp"
#include "bsumkit/errors.hpp"

namespace bsum {

namespace {

double uniform01(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

bool all_unconstrained(const std::vector<FeasibleSet>& sets) {
  return std::all_of(sets.begin(), sets.end(),
                     [](const FeasibleSet& s) { return s.kind() == SetKind::unconstrained; });
}

VectorXd project_blocks(const std::vector<FeasibleSet>& sets, const std::vector<Index>& dims,
                        const VectorXd& v) {
  BlockVector b(dims, v);
  for (std::size_t i = 0; i < sets.size(); ++i) {
    b.block(static_cast<Index>(i)) = sets[i].project(b.block(static_cast<Index>(i)));
  }
  return b.flat();
}

// Minimize 0.5 x'Qx + q'x over the product set, warm-started at x.
VectorXd minimize_aggregate(const MatrixXd& Q, const VectorXd& q,
                            const std::vector<FeasibleSet>& sets, const std::vector<Index>& dims,
                            const VectorXd& warm) {
  if (all_unconstrained(sets)) {
    Eigen::LLT<MatrixXd> llt(Q);
    if (llt.info() == Eigen::Success) {
      const Eigen::VectorXd d = Q.diagonal();
      // Reject numerically singular factorizations.
      const double piv = llt.matrixL().toDenseMatrix().diagonal().minCoeff();
      if (piv > 1e-10 * std::sqrt(std::max(d.maxCoeff(), 1e-300))) return llt.solve(-q);
    }
  }
  // Projected gradient; from a warm start on a singular Q it settles on the
  // solution nearest the previous iterate.
  const double L = std::max(Eigen::SelfAdjointEigenSolver<MatrixXd>(Q, Eigen::EigenvaluesOnly)
                                .eigenvalues()
                                .maxCoeff(),
                            1e-300);
  VectorXd x = project_blocks(sets, dims, warm);
  for (int it = 0; it < 100000; ++it) {
    const VectorXd g = Q * x + q;
    const VectorXd next = project_blocks(sets, dims, x - g / L);
    const double move = (next - x).norm();
    x = next;
    if (move <= 1e-13 * std::max(1.0, x.norm())) break;
  }
  return x;
}

}  // namespace

StochasticStream least_squares_stream(const MatrixXd& A, const VectorXd& b, SurrogateKind family,
                                      double gamma, std::uint64_t seed) {
  if (A.rows() != b.size() || A.rows() == 0) throw DimensionError("pool rows and targets differ");
  if (family != SurrogateKind::quadratic && family != SurrogateKind::proximal) {
    throw UnsupportedOperation("least-squares stream supports the quadratic and proximal families");
  }
  if (family == SurrogateKind::proximal && !(gamma > 0.0)) {
    throw PreconditionError("proximal stream needs gamma > 0");
  }
  StochasticStream s;
  s.family = family;
  s.dims = {A.cols()};
  s.seed = seed;
  s.draw = [A, b, family, gamma](const VectorXd& anchor, std::mt19937_64& rng) {
    const auto k = std::min<Index>(static_cast<Index>(uniform01(rng) * static_cast<double>(A.rows())),
                                   A.rows() - 1);
    const VectorXd a = A.row(k).transpose();
    QuadraticModel m;
    m.Q = 2.0 * a * a.transpose();
    m.q = -2.0 * b[k] * a;
    m.c = b[k] * b[k];
    if (family == SurrogateKind::proximal) {
      m.Q.diagonal().array() += gamma;
      m.q -= gamma * anchor;
      m.c += 0.5 * gamma * anchor.squaredNorm();
    }
    return m;
  };
  return s;
}

RunResult run_ssum(const StochasticStream& stream, const std::vector<FeasibleSet>& sets,
                   const StopCriteria& stop, std::optional<BlockVector> x0,
                   const SsumOptions& options) {
  stop.validate();
  if (stream.family != SurrogateKind::quadratic && stream.family != SurrogateKind::proximal) {
    throw UnsupportedOperation("SSUM needs an aggregable surrogate family (quadratic or proximal), got " +
                               to_string(stream.family));
  }
  if (!stream.draw) throw PreconditionError("stochastic stream has no sampler");
  if (sets.size() != stream.dims.size()) throw DimensionError("one feasible set per block is required");
  for (std::size_t i = 0; i < sets.size(); ++i) {
    if (sets[i].dim() != stream.dims[i]) throw DimensionError("set dimension does not match block " + std::to_string(i));
  }
  BlockVector x = x0 ? *x0 : BlockVector(stream.dims);
  if (!x.same_shape(BlockVector(stream.dims))) throw DimensionError("start point has the wrong shape");
  x.flat() = project_blocks(sets, stream.dims, x.flat());
  const Index d = x.total_dim();

  MatrixXd Qsum = MatrixXd::Zero(d, d);
  VectorXd qsum = VectorXd::Zero(d);
  double csum = 0.0;
  std::mt19937_64 rng(stream.seed);
  StopMonitor monitor(stop, 1, 1e-6);
  RunResult out{x, Trace{}};
  monitor.start(std::numeric_limits<double>::infinity());
  std::vector<Index> all(stream.dims.size());
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = static_cast<Index>(i);

  for (std::size_t r = 1;; ++r) {
    const QuadraticModel m = stream.draw(x.flat(), rng);
    if (m.Q.rows() != d || m.Q.cols() != d || m.q.size() != d) {
      throw DimensionError("drawn surrogate has the wrong dimension");
    }
    if (options.on_draw) options.on_draw(r, m);
    Qsum += m.Q;
    qsum += m.q;
    csum += m.c;
    const double inv = 1.0 / static_cast<double>(r);
    QuadraticModel avg{Qsum * inv, qsum * inv, csum * inv};
    if (options.on_aggregate) options.on_aggregate(r, avg);

    const VectorXd next = minimize_aggregate(avg.Q, avg.q, sets, stream.dims, x.flat());
    const double step = (next - x.flat()).norm();
    x.flat() = next;
    const double f = avg.value(next);
    const double gap =
        (next - project_blocks(sets, stream.dims, next - (avg.Q * next + avg.q))).norm();

    TraceRecord rec;
    rec.r = r;
    rec.blocks = all;
    rec.f = f;
    rec.step_norm = step;
    rec.stat_gap = gap;
    if (options.record_wall_time) rec.wall_ms = monitor.elapsed_ms();
    out.trace.records.push_back(rec);
    if (options.observer) options.observer(r, x);
    // The aggregate keeps changing with every draw, so only the iteration
    // budget and the wall clock end the run.
    if (auto w = monitor.check_wall_clock()) {
      out.trace.status = *w;
      break;
    }
    if (r >= stop.max_iters) {
      out.trace.status = TerminalStatus::max_iters;
      break;
    }
  }
  out.x = x;
  return out;
}

}  // namespace bsum
