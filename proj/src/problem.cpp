#include "bsumkit/problem.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "bsumkit/errors.hpp"

namespace bsum {

namespace {
std::string block_name(Index i) { return "block " + std::to_string(i); }
}  // namespace

bool Problem::has_nonsmooth() const {
  return std::any_of(nonsmooth.begin(), nonsmooth.end(),
                     [](const Nonsmooth& h) { return !h.is_zero(); });
}

bool Problem::composite_smooth() const {
  if (smooth && !gradient) return false;
  for (Index i = 0; i < num_blocks(); ++i) {
    if (!prox_onto_available(nonsmooth[static_cast<std::size_t>(i)],
                             sets[static_cast<std::size_t>(i)])) {
      return false;
    }
  }
  return true;
}

void Problem::validate() const {
  const auto n = dims.size();
  if (n == 0) throw DimensionError("problem '" + name + "' has no blocks");
  if (nonsmooth.size() != n || sets.size() != n) {
    throw DimensionError("problem '" + name + "': " + std::to_string(n) + " blocks but " +
                         std::to_string(sets.size()) + " sets and " +
                         std::to_string(nonsmooth.size()) + " nonsmooth terms");
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (dims[i] <= 0) throw DimensionError(block_name(static_cast<Index>(i)) + " has dimension <= 0");
    if (sets[i].dim() != dims[i]) {
      throw DimensionError(block_name(static_cast<Index>(i)) + " has dimension " +
                           std::to_string(dims[i]) + " but its set has dimension " +
                           std::to_string(sets[i].dim()));
    }
  }
  if (coupling) {
    if (coupling->A.size() != n) {
      throw DimensionError("coupling has " + std::to_string(coupling->A.size()) +
                           " matrices for " + std::to_string(n) + " blocks");
    }
    for (std::size_t i = 0; i < n; ++i) {
      const auto& Ai = coupling->A[i];
      if (Ai.rows() != coupling->b.size() || Ai.cols() != dims[i]) {
        throw DimensionError("coupling matrix for " + block_name(static_cast<Index>(i)) + " is " +
                             std::to_string(Ai.rows()) + "x" + std::to_string(Ai.cols()) +
                             ", expected " + std::to_string(coupling->b.size()) + "x" +
                             std::to_string(dims[i]));
      }
    }
  }
  if (jensen && jensen->coefficients.size() != n) {
    throw DimensionError("Jensen structure needs one coefficient vector per block");
  }
}

void Problem::check_point(const BlockVector& x) const {
  if (x.num_blocks() != num_blocks()) {
    throw DimensionError("point has " + std::to_string(x.num_blocks()) + " blocks, problem '" +
                         name + "' has " + std::to_string(num_blocks()));
  }
  for (Index i = 0; i < num_blocks(); ++i) {
    if (x.dim(i) != dims[static_cast<std::size_t>(i)]) {
      throw DimensionError(block_name(i) + " has " + std::to_string(x.dim(i)) +
                           " entries, problem '" + name + "' expects " +
                           std::to_string(dims[static_cast<std::size_t>(i)]));
    }
  }
}

bool Problem::is_feasible(const BlockVector& x, double tol) const {
  check_point(x);
  for (Index i = 0; i < num_blocks(); ++i) {
    if (!sets[static_cast<std::size_t>(i)].contains(x.block(i), tol)) return false;
  }
  return true;
}

BlockVector Problem::project(const BlockVector& x) const {
  check_point(x);
  BlockVector out = x;
  for (Index i = 0; i < num_blocks(); ++i) {
    out.block(i) = sets[static_cast<std::size_t>(i)].project(x.block(i));
  }
  return out;
}

Problem make_problem(std::string name, std::vector<Index> dims) {
  Problem p;
  p.name = std::move(name);
  p.dims = std::move(dims);
  for (Index d : p.dims) {
    p.nonsmooth.push_back(Nonsmooth::zero());
    p.sets.push_back(FeasibleSet::unconstrained(d));
  }
  return p;
}

double eval_smooth(const Problem& problem, const BlockVector& x) {
  problem.check_point(x);
  return problem.smooth ? problem.smooth(x) : 0.0;
}

double eval_objective(const Problem& problem, const BlockVector& x) {
  double f = eval_smooth(problem, x);
  for (Index i = 0; i < problem.num_blocks(); ++i) {
    f += problem.nonsmooth[static_cast<std::size_t>(i)].value(x.block(i));
  }
  return f;
}

VectorXd eval_block_gradient(const Problem& problem, Index i, const BlockVector& x) {
  problem.check_point(x);
  if (i < 0 || i >= problem.num_blocks()) {
    throw DimensionError("block index " + std::to_string(i) + " out of range");
  }
  if (!problem.smooth) return VectorXd::Zero(x.dim(i));
  if (!problem.gradient) {
    throw UnsupportedOperation("problem '" + problem.name + "' has no gradient evaluator");
  }
  VectorXd g = problem.gradient(x, i);
  if (g.size() != x.dim(i)) {
    throw DimensionError("gradient evaluator returned " + std::to_string(g.size()) +
                         " entries for " + block_name(i));
  }
  return g;
}

VectorXd eval_gradient(const Problem& problem, const BlockVector& x) {
  VectorXd g(x.total_dim());
  for (Index i = 0; i < problem.num_blocks(); ++i) {
    g.segment(x.offset(i), x.dim(i)) = eval_block_gradient(problem, i, x);
  }
  return g;
}

const std::vector<double>& default_derivative_ladder() {
  static const std::vector<double> ladder{1e-3, 1e-4, 1e-5};
  return ladder;
}

double directional_derivative_1d(const std::function<double(double)>& phi,
                                 const std::vector<double>& ladder) {
  if (ladder.empty()) throw PreconditionError("derivative ladder is empty");
  const double phi0 = phi(0.0);
  std::vector<double> steps;
  std::vector<double> quotients;
  for (std::size_t k = 0; k < ladder.size(); ++k) {
    const double lam = ladder[k];
    const double v = phi(lam);
    if (!std::isfinite(v)) {
      if (k + 1 == ladder.size()) {
        throw InfeasibleError("direction leaves the domain at the smallest ladder step " +
                              std::to_string(lam));
      }
      continue;
    }
    steps.push_back(lam);
    quotients.push_back((v - phi0) / lam);
  }
  if (quotients.size() == 1) return quotients.front();
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k + 1 < quotients.size(); ++k) {
    // First-order error term cancels for step ratio s = steps[k]/steps[k+1].
    const double s = steps[k] / steps[k + 1];
    const double extrapolated = (s * quotients[k + 1] - quotients[k]) / (s - 1.0);
    best = std::min(best, extrapolated);
  }
  return best;
}

double directional_derivative(const Problem& problem, const BlockVector& x, const VectorXd& d,
                              const std::vector<double>& ladder) {
  problem.check_point(x);
  if (d.size() != x.total_dim()) {
    throw DimensionError("direction has " + std::to_string(d.size()) + " entries, point has " +
                         std::to_string(x.total_dim()));
  }
  auto phi = [&](double lam) {
    BlockVector y(x.dims(), x.flat() + lam * d);
    if (lam > 0.0 && !problem.is_feasible(y, 1e-12)) {
      return std::numeric_limits<double>::quiet_NaN();
    }
    return eval_objective(problem, y);
  };
  return directional_derivative_1d(phi, ladder);
}

Problem coupled_slice_view(const Problem& problem) {
  problem.validate();
  if (!problem.coupling) throw PreconditionError("problem '" + problem.name + "' has no coupling");
  Problem out = problem;
  out.coupling.reset();
  out.name = problem.name + "/slices";
  const Coupling cp = *problem.coupling;
  std::vector<MatrixXd> pinv;
  for (std::size_t i = 0; i < cp.A.size(); ++i) {
    Eigen::ColPivHouseholderQR<MatrixXd> qr(cp.A[i]);
    if (qr.rank() < cp.A[i].cols()) {
      throw UnsupportedOperation("slice view needs full column rank coupling matrices; block " +
                                 std::to_string(i) + " is rank deficient");
    }
    pinv.push_back(cp.A[i].completeOrthogonalDecomposition().pseudoInverse());
  }
  const auto sets = problem.sets;
  out.block_solver = [cp, pinv, sets](const BlockVector& z, Index i, double) -> VectorXd {
    const auto ui = static_cast<std::size_t>(i);
    VectorXd rhs = cp.b;
    for (std::size_t j = 0; j < cp.A.size(); ++j) {
      if (j != ui) rhs -= cp.A[j] * z.block(static_cast<Index>(j));
    }
    VectorXd y = pinv[ui] * rhs;
    const bool on_slice = (cp.A[ui] * y - rhs).norm() <= 1e-10 * std::max(1.0, rhs.norm());
    if (!on_slice || !sets[ui].contains(y, 1e-12)) return z.block(i);
    return y;
  };
  return out;
}

}  // namespace bsum
