#include "bsumkit/solvers/nmf.hpp"

#include <cmath>
#include <limits>
#include <memory>
#include <random>

#include "bsumkit/errors.hpp"

namespace bsum {

namespace {

using ConstMap = Eigen::Map<const MatrixXd>;

struct Shape {
  Index M, K, N;
};

ConstMap H_of(const BlockVector& x, const Shape& s) { return ConstMap(x.block(0).data(), s.K, s.N); }
ConstMap W_of(const BlockVector& x, const Shape& s) { return ConstMap(x.block(1).data(), s.M, s.K); }

void check_input(const MatrixXd& V, Index K) {
  if (V.size() == 0) throw DimensionError("NMF input matrix is empty");
  if (K <= 0) throw PreconditionError("NMF rank must be positive");
  if (!V.allFinite() || V.minCoeff() < 0.0) throw PreconditionError("NMF input must be finite and nonnegative");
}

}  // namespace

double nmf_objective(const MatrixXd& V, const NmfFactors& f) {
  return 0.5 * (V - f.W * f.H).squaredNorm();
}

BlockVector nmf_pack(const NmfFactors& f) {
  VectorXd flat(f.H.size() + f.W.size());
  flat.head(f.H.size()) = Eigen::Map<const VectorXd>(f.H.data(), f.H.size());
  flat.tail(f.W.size()) = Eigen::Map<const VectorXd>(f.W.data(), f.W.size());
  return BlockVector({f.H.size(), f.W.size()}, flat);
}

NmfFactors nmf_unpack(const BlockVector& x, Index M, Index K, Index N) {
  const Shape s{M, K, N};
  return NmfFactors{W_of(x, s), H_of(x, s)};
}

Problem make_nmf_problem(const MatrixXd& V, Index K) {
  check_input(V, K);
  const Shape s{V.rows(), K, V.cols()};
  auto Vp = std::make_shared<const MatrixXd>(V);
  Problem p = make_problem("nmf", {K * s.N, s.M * K});
  p.sets = {FeasibleSet::nonneg(K * s.N), FeasibleSet::nonneg(s.M * K)};
  p.smooth = [Vp, s](const BlockVector& x) {
    return 0.5 * (*Vp - W_of(x, s) * H_of(x, s)).squaredNorm();
  };
  p.gradient = [Vp, s](const BlockVector& x, Index i) -> VectorXd {
    const MatrixXd W = W_of(x, s);
    const MatrixXd H = H_of(x, s);
    MatrixXd G;
    if (i == 0) {
      G = W.transpose() * (W * H) - W.transpose() * *Vp;
    } else {
      G = (W * H) * H.transpose() - *Vp * H.transpose();
    }
    return Eigen::Map<const VectorXd>(G.data(), G.size());
  };
  return p;
}

Surrogate nmf_surrogate(const MatrixXd& V, Index K, double epsilon) {
  check_input(V, K);
  if (!(epsilon > 0.0)) throw PreconditionError("NMF guard epsilon must be positive");
  const Shape s{V.rows(), K, V.cols()};
  return Surrogate::quadratic_diagonal([s, epsilon](const BlockVector& z, Index i) -> VectorXd {
    const MatrixXd W = W_of(z, s);
    const MatrixXd H = H_of(z, s);
    const MatrixXd num = i == 0 ? MatrixXd(W.transpose() * (W * H)) : MatrixXd((W * H) * H.transpose());
    const MatrixXd& cur = i == 0 ? H : W;
    VectorXd d(cur.size());
    for (Index k = 0; k < cur.size(); ++k) {
      const double denom = num.data()[k] + epsilon;
      if (!(denom > 0.0) || !std::isfinite(denom)) {
        throw DegenerateInstance("NMF update denominator is not positive at entry " + std::to_string(k) +
                                 " of " + (i == 0 ? "H" : "W"));
      }
      d[k] = cur.data()[k] > 0.0 ? denom / cur.data()[k] : std::numeric_limits<double>::infinity();
    }
    return d;
  });
}

NmfFactors nmf_default_init(Index M, Index N, Index K, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  NmfFactors f{MatrixXd(M, K), MatrixXd(K, N)};
  for (Index k = 0; k < f.W.size(); ++k) f.W.data()[k] = std::abs(gauss(rng)) + 0.1;
  for (Index k = 0; k < f.H.size(); ++k) f.H.data()[k] = std::abs(gauss(rng)) + 0.1;
  return f;
}

NmfResult nmf_factorize(const MatrixXd& V, Index K, const StopCriteria& stop,
                        const NmfOptions& options) {
  check_input(V, K);
  const Index M = V.rows(), N = V.cols();
  NmfFactors init = options.init ? *options.init : nmf_default_init(M, N, K, options.seed);
  if (init.W.rows() != M || init.W.cols() != K || init.H.rows() != K || init.H.cols() != N) {
    throw DimensionError("NMF initial factors have the wrong shape");
  }
  if (!(init.W.minCoeff() > 0.0) || !(init.H.minCoeff() > 0.0)) {
    throw PreconditionError("NMF initial factors must be strictly positive");
  }
  const Problem p = make_nmf_problem(V, K);
  const Surrogate s = nmf_surrogate(V, K, options.epsilon);
  auto run = run_bsum(p, {s}, SelectionRule::cyclic(2), stop, nmf_pack(init), options.engine);
  return NmfResult{nmf_unpack(run.x, M, K, N), std::move(run.trace)};
}

}  // namespace bsum
