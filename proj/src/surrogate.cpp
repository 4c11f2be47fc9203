#include "bsumkit/surrogate.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>

#include <boost/math/tools/minima.hpp>

#include "bsumkit/errors.hpp"

namespace bsum {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

std::string to_string(SurrogateKind kind) {
  switch (kind) {
    case SurrogateKind::exact: return "exact";
    case SurrogateKind::proximal: return "proximal";
    case SurrogateKind::quadratic: return "quadratic";
    case SurrogateKind::linear: return "linear";
    case SurrogateKind::jensen: return "jensen";
  }
  return "unknown";
}

Surrogate Surrogate::exact() { return Surrogate(); }

Surrogate Surrogate::proximal(double gamma) {
  if (!(gamma > 0.0) || !std::isfinite(gamma)) {
    throw PreconditionError("proximal surrogate needs gamma > 0");
  }
  Surrogate s;
  s.kind_ = SurrogateKind::proximal;
  s.gamma_ = gamma;
  return s;
}

Surrogate Surrogate::quadratic(double lipschitz) {
  if (!(lipschitz > 0.0) || !std::isfinite(lipschitz)) {
    throw PreconditionError("quadratic surrogate needs a positive curvature constant");
  }
  Surrogate s;
  s.kind_ = SurrogateKind::quadratic;
  s.qmode_ = QuadraticMode::scalar;
  s.lipschitz_ = lipschitz;
  return s;
}

Surrogate Surrogate::quadratic_estimated(double safety) {
  if (!(safety >= 1.0)) throw PreconditionError("curvature safety factor must be >= 1");
  Surrogate s;
  s.kind_ = SurrogateKind::quadratic;
  s.qmode_ = QuadraticMode::estimated;
  s.safety_ = safety;
  return s;
}

Surrogate Surrogate::quadratic_matrix(MatrixXd phi) {
  if (phi.rows() != phi.cols() || phi.rows() == 0) {
    throw DimensionError("curvature matrix must be square and nonempty");
  }
  if ((phi - phi.transpose()).cwiseAbs().maxCoeff() > 1e-12 * std::max(1.0, phi.cwiseAbs().maxCoeff())) {
    throw PreconditionError("curvature matrix must be symmetric");
  }
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(phi, Eigen::EigenvaluesOnly);
  if (!(es.eigenvalues().minCoeff() > 0.0)) {
    throw PreconditionError("curvature matrix must be positive definite; smallest eigenvalue " +
                            std::to_string(es.eigenvalues().minCoeff()));
  }
  Surrogate s;
  s.kind_ = SurrogateKind::quadratic;
  s.qmode_ = QuadraticMode::matrix;
  s.phi_ = std::make_shared<const MatrixXd>(std::move(phi));
  return s;
}

Surrogate Surrogate::quadratic_diagonal(DiagonalCurvatureFn curvature) {
  if (!curvature) throw PreconditionError("diagonal curvature callback is empty");
  Surrogate s;
  s.kind_ = SurrogateKind::quadratic;
  s.qmode_ = QuadraticMode::diagonal;
  s.curvature_ = std::move(curvature);
  return s;
}

Surrogate Surrogate::linear() {
  Surrogate s;
  s.kind_ = SurrogateKind::linear;
  return s;
}

Surrogate Surrogate::jensen(VectorXd weights) {
  if (weights.size() > 0) {
    if (weights.minCoeff() < 0.0) throw PreconditionError("Jensen weights must be nonnegative");
    if (std::abs(weights.sum() - 1.0) > 1e-12) {
      throw PreconditionError("Jensen weights must sum to one");
    }
  }
  Surrogate s;
  s.kind_ = SurrogateKind::jensen;
  s.weights_ = std::move(weights);
  return s;
}

std::string Surrogate::describe() const {
  std::ostringstream os;
  os << to_string(kind_);
  if (kind_ == SurrogateKind::proximal) os << "(gamma=" << gamma_ << ")";
  if (kind_ == SurrogateKind::quadratic) {
    switch (qmode_) {
      case QuadraticMode::scalar: os << "(L=" << lipschitz_ << ")"; break;
      case QuadraticMode::estimated: os << "(estimated, safety=" << safety_ << ")"; break;
      case QuadraticMode::matrix: os << "(matrix)"; break;
      case QuadraticMode::diagonal: os << "(diagonal)"; break;
    }
  }
  return os.str();
}

std::vector<Surrogate> per_block(const std::vector<Surrogate>& s, Index n) {
  if (s.size() == 1) return std::vector<Surrogate>(static_cast<std::size_t>(n), s.front());
  if (static_cast<Index>(s.size()) != n) {
    throw DimensionError("got " + std::to_string(s.size()) + " surrogates for " +
                         std::to_string(n) + " blocks");
  }
  return s;
}

namespace {

void check_block(const Problem& problem, Index i) {
  if (i < 0 || i >= problem.num_blocks()) {
    throw DimensionError("block index " + std::to_string(i) + " out of range");
  }
}

const FeasibleSet& set_of(const Problem& p, Index i) { return p.sets[static_cast<std::size_t>(i)]; }
const Nonsmooth& h_of(const Problem& p, Index i) { return p.nonsmooth[static_cast<std::size_t>(i)]; }

double other_h(const Problem& problem, Index i, const BlockVector& z) {
  double s = 0.0;
  for (Index j = 0; j < problem.num_blocks(); ++j) {
    if (j != i) s += h_of(problem, j).value(z.block(j));
  }
  return s;
}

VectorXd diagonal_curvature(const Surrogate& s, const Problem& problem, Index i,
                            const BlockVector& z) {
  const Index m = z.dim(i);
  switch (s.quadratic_mode()) {
    case Surrogate::QuadraticMode::scalar: return VectorXd::Constant(m, s.lipschitz());
    case Surrogate::QuadraticMode::estimated:
      return VectorXd::Constant(m, s.safety() * estimate_block_lipschitz(problem, i, z));
    case Surrogate::QuadraticMode::diagonal: {
      VectorXd d = s.curvature()(z, i);
      if (d.size() != m) throw DimensionError("diagonal curvature has the wrong length");
      for (Index j = 0; j < m; ++j) {
        if (!(d[j] > 0.0)) {
          throw DegenerateInstance("diagonal curvature entry " + std::to_string(j) + " of block " +
                                   std::to_string(i) + " is not positive");
        }
      }
      return d;
    }
    case Surrogate::QuadraticMode::matrix: break;
  }
  throw UnsupportedOperation("matrix curvature has no diagonal form");
}

const JensenStructure& jensen_of(const Problem& problem) {
  if (!problem.jensen) {
    throw UnsupportedOperation("Jensen surrogate needs a problem with Jensen structure");
  }
  return *problem.jensen;
}

VectorXd jensen_weights(const Surrogate& s, const Problem& problem, Index i) {
  const VectorXd& a = jensen_of(problem).coefficients[static_cast<std::size_t>(i)];
  if (s.jensen_weights().size() > 0) {
    if (s.jensen_weights().size() != a.size()) throw DimensionError("Jensen weights have the wrong length");
    for (Index j = 0; j < a.size(); ++j) {
      if (a[j] != 0.0 && s.jensen_weights()[j] == 0.0) {
        throw PreconditionError("Jensen weight is zero where the coefficient is not");
      }
    }
    return s.jensen_weights();
  }
  const double l1 = a.lpNorm<1>();
  if (l1 == 0.0) return VectorXd::Zero(a.size());
  return a.cwiseAbs() / l1;
}

VectorXd inner_products(const JensenStructure& js, const BlockVector& z) {
  VectorXd t(z.num_blocks());
  for (Index k = 0; k < z.num_blocks(); ++k) t[k] = js.coefficients[static_cast<std::size_t>(k)].dot(z.block(k));
  return t;
}

// Sum over j of w_j F(t with t_i = a_j/w_j (x_j - z_j) + a_i'z_i), without h.
double jensen_smooth_value(const Surrogate& s, const Problem& problem, Index i,
                           const VectorXd& xi, const BlockVector& z) {
  const JensenStructure& js = jensen_of(problem);
  const VectorXd& a = js.coefficients[static_cast<std::size_t>(i)];
  const VectorXd w = jensen_weights(s, problem, i);
  VectorXd t = inner_products(js, z);
  const double ti = t[i];
  if (w.sum() == 0.0) return js.outer(t);
  double u = 0.0;
  for (Index j = 0; j < a.size(); ++j) {
    if (w[j] == 0.0) continue;
    t[i] = a[j] / w[j] * (xi[j] - z.block(i)[j]) + ti;
    u += w[j] * js.outer(t);
  }
  return u;
}

// Golden/Brent search on a convex scalar function over [lo, hi].
double minimize_convex_1d(const std::function<double(double)>& psi, double start, double lo,
                          double hi) {
  double x0 = std::clamp(start, lo, hi);
  double f0 = psi(x0);
  double step = 1e-2 * std::max(1.0, std::abs(x0));
  double a = lo, b = hi;
  if (!(std::isfinite(lo) && std::isfinite(hi))) {
    // Pick a descent direction, then expand until the function turns up.
    double dir = 0.0;
    const double xr = std::min(x0 + step, hi);
    const double xl = std::max(x0 - step, lo);
    const double fr = psi(xr), fl = psi(xl);
    if (fr < f0) dir = 1.0;
    else if (fl < f0) dir = -1.0;
    if (dir == 0.0) {
      a = xl;
      b = xr;
    } else {
      double prev = x0;
      double cur = dir > 0 ? xr : xl;
      double fcur = dir > 0 ? fr : fl;
      for (int k = 0;; ++k) {
        step *= 2.0;
        double next = std::clamp(cur + dir * step, lo, hi);
        const double fnext = psi(next);
        if (fnext >= fcur || next == cur) {
          a = std::min(prev, next);
          b = std::max(prev, next);
          break;
        }
        if (std::abs(next) > 1e30 || k > 2000) {
          throw DivergenceError("one-dimensional block subproblem is unbounded below");
        }
        prev = cur;
        cur = next;
        fcur = fnext;
      }
    }
  }
  auto r = boost::math::tools::brent_find_minima(psi, a, b, 52);
  // Brent stops near sqrt(eps); keep the start if it is no worse.
  return r.second <= f0 ? r.first : x0;
}

VectorXd minimize_jensen(const Surrogate& s, const Problem& problem, Index i,
                         const BlockVector& z) {
  const FeasibleSet& set = set_of(problem, i);
  const Nonsmooth& h = h_of(problem, i);
  if (!set.separable() || h.kind() == Nonsmooth::Kind::custom) {
    throw UnsupportedOperation("Jensen minimizer supports separable sets with zero or l1 terms");
  }
  const JensenStructure& js = jensen_of(problem);
  const VectorXd& a = js.coefficients[static_cast<std::size_t>(i)];
  const VectorXd w = jensen_weights(s, problem, i);
  const VectorXd zi = z.block(i);
  VectorXd t = inner_products(js, z);
  const double ti = t[i];
  VectorXd out = zi;
  for (Index j = 0; j < a.size(); ++j) {
    if (w[j] == 0.0) {
      // The smooth part ignores this entry; only h_i acts on it.
      if (!h.is_zero()) out[j] = std::clamp(0.0, set.lo()[j], set.hi()[j]);
      continue;
    }
    auto psi = [&](double y) {
      VectorXd tt = t;
      tt[i] = a[j] / w[j] * (y - zi[j]) + ti;
      return w[j] * js.outer(tt) + h.lambda() * std::abs(y);
    };
    out[j] = minimize_convex_1d(psi, zi[j], set.lo()[j], set.hi()[j]);
  }
  return out;
}

// Coordinatewise minimization of c'x + lambda*|x| over [lo, hi]; ties keep z.
VectorXd minimize_linear_separable(const VectorXd& c, double lambda, const FeasibleSet& set,
                                   const VectorXd& zi) {
  VectorXd out(zi.size());
  for (Index j = 0; j < zi.size(); ++j) {
    const double lo = set.lo()[j], hi = set.hi()[j];
    if ((hi == kInf && c[j] + lambda < 0.0) || (lo == -kInf && c[j] - lambda > 0.0)) {
      throw DivergenceError("linear block subproblem is unbounded below along entry " +
                            std::to_string(j));
    }
    auto val = [&](double x) { return c[j] * x + lambda * std::abs(x); };
    // Candidates: current value first so it wins exact ties.
    double best = std::clamp(zi[j], lo, hi);
    double best_val = val(best);
    for (double cand : {lo, hi, 0.0}) {
      if (!std::isfinite(cand) || cand < lo || cand > hi) continue;
      const double v = val(cand);
      if (v < best_val || (v == best_val && std::abs(cand - zi[j]) < std::abs(best - zi[j]))) {
        best = cand;
        best_val = v;
      }
    }
    out[j] = best;
  }
  return out;
}

VectorXd minimize_linear(const Problem& problem, Index i, const BlockVector& z) {
  const FeasibleSet& set = set_of(problem, i);
  const Nonsmooth& h = h_of(problem, i);
  const VectorXd c = eval_block_gradient(problem, i, z);
  const VectorXd zi = z.block(i);
  if (h.kind() == Nonsmooth::Kind::custom) {
    throw UnsupportedOperation("linear surrogate minimizer does not support custom nonsmooth terms");
  }
  if (set.separable()) return minimize_linear_separable(c, h.lambda(), set, zi);
  if (set.kind() == SetKind::euclidean_ball && h.is_zero()) {
    const double nc = c.norm();
    if (nc == 0.0) return zi;
    return -set.radius() / nc * c;
  }
  if (set.kind() == SetKind::probability_simplex) {
    const double cmin = c.minCoeff();
    if (c.dot(zi) <= cmin) return zi;
    Index k = 0;
    for (Index j = 0; j < c.size(); ++j) {
      if (c[j] == cmin) {
        k = j;
        break;
      }
    }
    VectorXd out = VectorXd::Zero(c.size());
    out[k] = 1.0;
    return out;
  }
  throw UnsupportedOperation("linear surrogate minimizer unavailable over a " + to_string(set.kind()) +
                             " set with this nonsmooth term");
}

InnerResult run_inner(const SmoothModel& model, const Problem& problem, Index i,
                      const BlockVector& z, const InnerSolverBudget& budget) {
  const FeasibleSet& set = set_of(problem, i);
  const Nonsmooth& h = h_of(problem, i);
  if (!prox_onto_available(h, set)) {
    throw UnsupportedOperation("no inner solver for block " + std::to_string(i) +
                               ": proximal map over its set is not available");
  }
  return inner_prox_gradient(model, h, set, VectorXd(z.block(i)), budget);
}

}  // namespace

double estimate_block_lipschitz(const Problem& problem, Index i, const BlockVector& z) {
  check_block(problem, i);
  const Index m = z.dim(i);
  VectorXd v(m);
  for (Index j = 0; j < m; ++j) v[j] = 1.0 + 0.1 * static_cast<double>(j % 7);
  v.normalize();
  const double eps = 1e-5 * std::max(1.0, z.block(i).norm());
  auto hess = [&](const VectorXd& dir) {
    BlockVector zp = z, zm = z;
    zp.block(i) += eps * dir;
    zm.block(i) -= eps * dir;
    return VectorXd((eval_block_gradient(problem, i, zp) - eval_block_gradient(problem, i, zm)) /
                    (2.0 * eps));
  };
  double lam = 0.0;
  for (int k = 0; k < 200; ++k) {
    VectorXd hv = hess(v);
    const double nrm = hv.norm();
    if (nrm == 0.0) return 1e-12;
    const double next = nrm;
    v = hv / nrm;
    if (std::abs(next - lam) <= 1e-8 * next) {
      lam = next;
      break;
    }
    lam = next;
  }
  return std::max(lam, 1e-12);
}

SmoothModel surrogate_smooth_model(const Surrogate& s, const Problem& problem, Index i,
                                   const BlockVector& z) {
  check_block(problem, i);
  problem.check_point(z);
  const VectorXd zi = z.block(i);
  SmoothModel m;
  switch (s.kind()) {
    case SurrogateKind::exact:
    case SurrogateKind::proximal: {
      if (problem.smooth && !problem.gradient) {
        throw UnsupportedOperation("problem '" + problem.name +
                                   "' has no gradient evaluator for an iterative block solve");
      }
      const double gamma = s.kind() == SurrogateKind::proximal ? s.gamma() : 0.0;
      m.value = [&problem, z, i, gamma, zi](const VectorXd& x) {
        return eval_smooth(problem, z.with_block(i, x)) + 0.5 * gamma * (x - zi).squaredNorm();
      };
      m.gradient = [&problem, z, i, gamma, zi](const VectorXd& x) -> VectorXd {
        return eval_block_gradient(problem, i, z.with_block(i, x)) + gamma * (x - zi);
      };
      m.curvature_hint = std::max(1.0, gamma);
      return m;
    }
    case SurrogateKind::quadratic: {
      const double gz = eval_smooth(problem, z);
      const VectorXd grad = eval_block_gradient(problem, i, z);
      if (s.quadratic_mode() == Surrogate::QuadraticMode::matrix) {
        const MatrixXd phi = s.phi();
        if (phi.rows() != zi.size()) throw DimensionError("curvature matrix size does not match the block");
        m.value = [gz, grad, phi, zi](const VectorXd& x) {
          const VectorXd d = x - zi;
          return gz + grad.dot(d) + 0.5 * d.dot(phi * d);
        };
        m.gradient = [grad, phi, zi](const VectorXd& x) -> VectorXd { return grad + phi * (x - zi); };
        m.curvature_hint = Eigen::SelfAdjointEigenSolver<MatrixXd>(phi, Eigen::EigenvaluesOnly)
                               .eigenvalues()
                               .maxCoeff();
        return m;
      }
      const VectorXd d = diagonal_curvature(s, problem, i, z);
      m.value = [gz, grad, d, zi](const VectorXd& x) {
        double v = gz;
        for (Index j = 0; j < x.size(); ++j) {
          const double dx = x[j] - zi[j];
          if (dx == 0.0) continue;
          v += grad[j] * dx + 0.5 * d[j] * dx * dx;
        }
        return v;
      };
      m.gradient = [grad, d, zi](const VectorXd& x) -> VectorXd {
        VectorXd g = grad;
        for (Index j = 0; j < x.size(); ++j) {
          const double dx = x[j] - zi[j];
          if (dx != 0.0) g[j] += d[j] * dx;
        }
        return g;
      };
      m.curvature_hint = d.allFinite() ? d.maxCoeff() : 1.0;
      return m;
    }
    case SurrogateKind::linear: {
      const double gz = eval_smooth(problem, z);
      const VectorXd grad = eval_block_gradient(problem, i, z);
      m.value = [gz, grad, zi](const VectorXd& x) { return gz + grad.dot(x - zi); };
      m.gradient = [grad](const VectorXd&) -> VectorXd { return grad; };
      m.curvature_hint = 1.0;
      return m;
    }
    case SurrogateKind::jensen: break;
  }
  throw UnsupportedOperation("Jensen surrogate has no smooth-model form");
}

double surrogate_value(const Surrogate& s, const Problem& problem, Index i, const VectorXd& xi,
                       const BlockVector& z) {
  check_block(problem, i);
  problem.check_point(z);
  if (xi.size() != z.dim(i)) {
    throw DimensionError("block " + std::to_string(i) + " point has " + std::to_string(xi.size()) +
                         " entries, expected " + std::to_string(z.dim(i)));
  }
  const double rest = other_h(problem, i, z) + h_of(problem, i).value(xi);
  if (s.kind() == SurrogateKind::exact) return eval_objective(problem, z.with_block(i, xi));
  if (s.kind() == SurrogateKind::proximal) {
    return eval_objective(problem, z.with_block(i, xi)) +
           0.5 * s.gamma() * (xi - VectorXd(z.block(i))).squaredNorm();
  }
  if (s.kind() == SurrogateKind::jensen) return jensen_smooth_value(s, problem, i, xi, z) + rest;
  if (s.kind() == SurrogateKind::linear && problem.smooth && !problem.gradient) {
    throw UnsupportedOperation("linear surrogate needs a gradient evaluator");
  }
  return surrogate_smooth_model(s, problem, i, z).value(xi) + rest;
}

InnerResult inner_prox_gradient(const SmoothModel& model, const Nonsmooth& h,
                                const FeasibleSet& set, const VectorXd& x0,
                                const InnerSolverBudget& budget) {
  VectorXd x = prox_onto_available(h, set) ? set.project(x0) : x0;
  double L = std::max(model.curvature_hint, 1e-12);
  InnerResult best{x, kInf, 0};
  for (int it = 0; it <= budget.max_iters; ++it) {
    const VectorXd g = model.gradient(x);
    const double gap = (x - prox_onto(h, set, x - g, 1.0)).norm();
    if (gap < best.gap) best = InnerResult{x, gap, it};
    if (gap <= budget.tolerance) return InnerResult{x, gap, it};
    if (it == budget.max_iters) break;
    const double fx = model.value(x);
    VectorXd next;
    for (int bt = 0; bt < 200; ++bt) {
      next = prox_onto(h, set, x - g / L, 1.0 / L);
      const VectorXd d = next - x;
      const double bound = fx + g.dot(d) + 0.5 * L * d.squaredNorm();
      if (model.value(next) <= bound + 1e-15 * std::abs(fx)) break;
      // Near the minimizer the value test drowns in rounding; a local
      // Lipschitz check on the gradient is still meaningful there.
      if ((model.gradient(next) - g).norm() <= L * d.norm()) break;
      L *= 2.0;
    }
    x = next;
  }
  throw BudgetExceeded("inner solver exceeded " + std::to_string(budget.max_iters) +
                           " iterations; best gap " + std::to_string(best.gap),
                       best.x, best.gap);
}

VectorXd minimize_block_surrogate(const Surrogate& s, const Problem& problem, Index i,
                                  const BlockVector& z) {
  check_block(problem, i);
  problem.check_point(z);
  const FeasibleSet& set = set_of(problem, i);
  const Nonsmooth& h = h_of(problem, i);
  const VectorXd zi = z.block(i);
  switch (s.kind()) {
    case SurrogateKind::exact:
    case SurrogateKind::proximal: {
      const double gamma = s.kind() == SurrogateKind::proximal ? s.gamma() : 0.0;
      if (problem.block_solver) {
        VectorXd y = problem.block_solver(z, i, gamma);
        if (y.size() != zi.size()) throw DimensionError("block solver returned the wrong length");
        return y;
      }
      return run_inner(surrogate_smooth_model(s, problem, i, z), problem, i, z, s.budget).x;
    }
    case SurrogateKind::quadratic: {
      const VectorXd grad = eval_block_gradient(problem, i, z);
      if (s.quadratic_mode() == Surrogate::QuadraticMode::matrix) {
        if (h.is_zero() && set.kind() == SetKind::unconstrained) {
          return zi - s.phi().llt().solve(grad);
        }
        return run_inner(surrogate_smooth_model(s, problem, i, z), problem, i, z, s.budget).x;
      }
      const VectorXd d = diagonal_curvature(s, problem, i, z);
      VectorXd v(zi.size());
      VectorXd step(zi.size());
      for (Index j = 0; j < zi.size(); ++j) {
        step[j] = std::isinf(d[j]) ? 0.0 : 1.0 / d[j];
        v[j] = zi[j] - step[j] * grad[j];
      }
      const bool scalar = s.quadratic_mode() != Surrogate::QuadraticMode::diagonal;
      if (scalar && prox_onto_available(h, set)) return prox_onto(h, set, v, step[0]);
      if (set.separable() && h.kind() != Nonsmooth::Kind::custom) {
        return prox_onto_diagonal(h, set, v, step);
      }
      return run_inner(surrogate_smooth_model(s, problem, i, z), problem, i, z, s.budget).x;
    }
    case SurrogateKind::linear: return minimize_linear(problem, i, z);
    case SurrogateKind::jensen: return minimize_jensen(s, problem, i, z);
  }
  throw UnsupportedOperation("unknown surrogate kind");
}

namespace {

double block_objective(const Problem& problem, Index i, const VectorXd& xi, const BlockVector& z) {
  return eval_objective(problem, z.with_block(i, xi));
}

}  // namespace

ValidationReport validate_assumption_a(const std::vector<Surrogate>& surrogates,
                                       const Problem& problem, const BlockVector& z,
                                       int n_samples, std::uint64_t seed,
                                       const ValidationOptions& options) {
  problem.validate();
  problem.check_point(z);
  if (n_samples < 1) throw PreconditionError("validator needs at least one sample");
  const auto surr = per_block(surrogates, problem.num_blocks());
  ValidationReport rep;
  rep.a2_min_slack = kInf;
  rep.a3_implied = problem.has_nonsmooth() && problem.has_gradient();
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  const double fz = eval_objective(problem, z);
  const double scales[] = {1e-3, 1e-1, 1.0, 10.0};

  for (Index i = 0; i < problem.num_blocks(); ++i) {
    const Surrogate& s = surr[static_cast<std::size_t>(i)];
    const FeasibleSet& set = set_of(problem, i);
    const VectorXd zi = z.block(i);
    const Index m = zi.size();

    const double a1 = std::abs(surrogate_value(s, problem, i, zi, z) - fz);
    rep.a1_max_abs_gap = std::max(rep.a1_max_abs_gap, a1);
    if (a1 > options.a1_tolerance * std::max(1.0, std::abs(fz))) rep.a1_pass = false;

    auto check_sample = [&](const VectorXd& x) {
      const double slack =
          surrogate_value(s, problem, i, x, z) - block_objective(problem, i, x, z);
      ++rep.sample_count;
      if (slack < rep.a2_min_slack) {
        rep.a2_min_slack = slack;
        rep.worst_a2_point = x;
        rep.worst_a2_block = i;
      }
    };
    // Unit probes along each coordinate, then seeded random points.
    const Index probes = std::min<Index>(m, 64);
    for (Index j = 0; j < probes; ++j) {
      for (double sign : {1.0, -1.0}) {
        VectorXd x = zi;
        x[j] += sign;
        check_sample(set.project(x));
      }
    }
    const double base = std::max(1.0, zi.norm() / std::sqrt(static_cast<double>(m)));
    for (int k = 0; k < n_samples; ++k) {
      check_sample(set.sample_near(zi, base * scales[k % 4], rng));
    }

    if (!rep.a3_implied) {
      for (int k = 0; k < options.a3_directions; ++k) {
        VectorXd xi(m);
        for (Index j = 0; j < m; ++j) xi[j] = gauss(rng);
        const VectorXd d = set.project(zi + xi) - zi;
        const double nd = d.norm();
        if (nd < 1e-3) continue;
        const double du = directional_derivative_1d(
            [&](double lam) { return surrogate_value(s, problem, i, VectorXd(zi + lam * d), z); });
        const double df = directional_derivative_1d(
            [&](double lam) { return block_objective(problem, i, VectorXd(zi + lam * d), z); });
        const double gap = std::abs(du - df) / nd;
        rep.a3_max_deriv_gap = std::max(rep.a3_max_deriv_gap, gap);
        if (gap > options.a3_tolerance * std::max(1.0, std::abs(df) / nd)) rep.a3_pass = false;
      }
    }
  }
  rep.a2_pass = !(rep.a2_min_slack < -options.a2_tolerance);
  return rep;
}

ValidationReport validate_assumption_a(const Surrogate& s, const Problem& problem,
                                       const BlockVector& z, int n_samples, std::uint64_t seed,
                                       const ValidationOptions& options) {
  return validate_assumption_a(std::vector<Surrogate>{s}, problem, z, n_samples, seed, options);
}

std::string format_report(const ValidationReport& r) {
  std::ostringstream os;
  os.precision(6);
  os << "samples            " << r.sample_count << '\n'
     << "A1 max |u(z)-f(z)| " << r.a1_max_abs_gap << "  " << (r.a1_pass ? "pass" : "FAIL") << '\n'
     << "A2 min slack       " << r.a2_min_slack << "  " << (r.a2_pass ? "pass" : "FAIL") << '\n'
     << "A3 max deriv gap   ";
  if (r.a3_implied) {
    os << "implied (composite form)\n";
  } else {
    os << r.a3_max_deriv_gap << "  " << (r.a3_pass ? "pass" : "FAIL") << '\n';
  }
  return os.str();
}

}  // namespace bsum
