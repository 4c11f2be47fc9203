#include "bsumkit/pathology.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "bsumkit/errors.hpp"

namespace bsum {

std::string to_string(BehaviorKind kind) {
  switch (kind) {
    case BehaviorKind::stuck_point: return "stuck_point";
    case BehaviorKind::cycle: return "cycle";
    case BehaviorKind::oscillation: return "oscillation";
    case BehaviorKind::converges_to: return "converges_to";
  }
  return "unknown";
}

const std::vector<std::string>& pathology_names() {
  static const std::vector<std::string> names{"ex2_l1_nonregular", "ex4_coupling",
                                              "ex5_linear_bound", "ex6_powell", "naive_parallel"};
  return names;
}

double minimize_weighted_abs_1d(const std::vector<double>& weights,
                                const std::vector<double>& breakpoints, double gamma, double z,
                                double lo, double hi) {
  if (weights.size() != breakpoints.size()) throw DimensionError("weights and breakpoints differ in length");
  constexpr double inf = std::numeric_limits<double>::infinity();
  std::vector<std::size_t> order(weights.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return breakpoints[a] < breakpoints[b]; });
  std::vector<double> t;
  std::vector<double> w;
  for (std::size_t k : order) {
    if (weights[k] < 0.0) throw PreconditionError("weights must be nonnegative");
    if (weights[k] == 0.0) continue;
    if (!t.empty() && t.back() == breakpoints[k]) {
      w.back() += weights[k];
    } else {
      t.push_back(breakpoints[k]);
      w.push_back(weights[k]);
    }
  }
  const double total = std::accumulate(w.begin(), w.end(), 0.0);
  const double flat_tol = 1e-12 * std::max(1.0, total);

  // slope[j] is the derivative of the absolute-value sum on (t[j-1], t[j]).
  std::vector<double> slope(t.size() + 1);
  slope[0] = -total;
  for (std::size_t j = 0; j < t.size(); ++j) slope[j + 1] = slope[j] + 2.0 * w[j];

  double a = -inf;
  double b = inf;
  bool found = false;
  for (std::size_t j = 0; j <= t.size() && !found; ++j) {
    const double left = j == 0 ? -inf : t[j - 1];
    const double right = j == t.size() ? inf : t[j];
    if (gamma > 0.0) {
      const double x = z - slope[j] / gamma;
      if (x > left && x < right) {
        a = b = x;
        found = true;
      }
    } else if (std::abs(slope[j]) <= flat_tol) {
      a = left;
      b = right;
      found = true;
    }
    if (!found && j < t.size()) {
      const double lower = slope[j] + gamma * (t[j] - z);
      const double upper = slope[j + 1] + gamma * (t[j] - z);
      // A flat piece to the right is handled as an interval on the next pass.
      const bool flat_next = gamma == 0.0 && std::abs(upper) <= flat_tol;
      if (lower <= 0.0 && upper >= 0.0 && !flat_next) {
        a = b = t[j];
        found = true;
      }
    }
  }
  if (!found) throw DivergenceError("piecewise-linear block objective is unbounded below");
  const double ca = std::max(a, lo);
  const double cb = std::min(b, hi);
  if (ca <= cb) return std::clamp(z, ca, cb);
  return b < lo ? lo : hi;
}

namespace {

Problem ex2_problem() {
  Problem p = make_problem("ex2_l1_nonregular", {1, 1});
  MatrixXd A(2, 2);
  A << 3, 4, 2, 1;
  p.smooth = [A](const BlockVector& x) { return (A * x.flat()).lpNorm<1>(); };
  p.block_solver = [A](const BlockVector& z, Index i, double gamma) {
    const Index other = 1 - i;
    std::vector<double> w;
    std::vector<double> t;
    for (Index k = 0; k < A.rows(); ++k) {
      const double a = A(k, i);
      if (a == 0.0) continue;
      const double c = A(k, other) * z.flat()[other];
      w.push_back(std::abs(a));
      t.push_back(-c / a);
    }
    const double inf = std::numeric_limits<double>::infinity();
    VectorXd out(1);
    out[0] = minimize_weighted_abs_1d(w, t, gamma, z.flat()[i], -inf, inf);
    return out;
  };
  p.known_optimum = KnownOptimum{0.0, "derived: the l1 norm is nonnegative and vanishes at 0"};
  return p;
}

Problem ex4_problem() {
  Problem p = make_problem("ex4_coupling", {1, 1});
  p.smooth = [](const BlockVector& x) { return x.flat().squaredNorm(); };
  p.gradient = [](const BlockVector& x, Index i) -> VectorXd { return 2.0 * x.block(i); };
  p.block_solver = [](const BlockVector& z, Index i, double gamma) -> VectorXd {
    return z.block(i) * (gamma / (2.0 + gamma));
  };
  Coupling c;
  c.A = {MatrixXd::Ones(1, 1), MatrixXd::Ones(1, 1)};
  c.b = VectorXd::Constant(1, 2.0);
  p.coupling = c;
  p.known_optimum = KnownOptimum{2.0, "reference: stated optimal value of the coupled example"};
  return p;
}

// Shared by the two box-constrained two-block quadratics: f = (x1 + sign*x2)^2.
Problem two_block_square(const std::string& name, double sign) {
  Problem p = make_problem(name, {1, 1});
  p.sets = {FeasibleSet::box(1, -1.0, 1.0), FeasibleSet::box(1, -1.0, 1.0)};
  p.smooth = [sign](const BlockVector& x) {
    const double s = x.flat()[0] + sign * x.flat()[1];
    return s * s;
  };
  p.gradient = [sign](const BlockVector& x, Index i) -> VectorXd {
    const double s = x.flat()[0] + sign * x.flat()[1];
    return VectorXd::Constant(1, 2.0 * s * (i == 0 ? 1.0 : sign));
  };
  p.block_solver = [sign](const BlockVector& z, Index i, double gamma) -> VectorXd {
    // (y + c)^2 + gamma/2 (y - z_i)^2 with c = sign * other.
    const double c = sign * z.flat()[1 - i];
    const double y = (gamma * z.flat()[i] - 2.0 * c) / (2.0 + gamma);
    return VectorXd::Constant(1, std::clamp(y, -1.0, 1.0));
  };
  return p;
}

Problem powell_problem() {
  Problem p = make_problem("ex6_powell", {1, 1, 1});
  auto pen = [](double v) {
    const double e = std::max(std::abs(v) - 1.0, 0.0);
    return e * e;
  };
  p.smooth = [pen](const BlockVector& x) {
    const VectorXd& v = x.flat();
    return -(v[0] * v[1] + v[1] * v[2] + v[0] * v[2]) + pen(v[0]) + pen(v[1]) + pen(v[2]);
  };
  p.gradient = [](const BlockVector& x, Index i) -> VectorXd {
    const VectorXd& v = x.flat();
    const double s = v.sum() - v[i];
    const double e = std::max(std::abs(v[i]) - 1.0, 0.0);
    return VectorXd::Constant(1, -s + 2.0 * e * (v[i] > 0 ? 1.0 : -1.0));
  };
  p.block_solver = [](const BlockVector& z, Index i, double gamma) -> VectorXd {
    // -y s + (|y|-1)_+^2 + gamma/2 (y - z_i)^2 is convex and C^1 in y.
    const VectorXd& v = z.flat();
    const double s = v.sum() - v[i];
    const double zi = v[i];
    double y;
    if (gamma > 0.0 && std::abs(zi + s / gamma) <= 1.0) {
      y = zi + s / gamma;
    } else if (gamma == 0.0 && s == 0.0) {
      y = std::clamp(zi, -1.0, 1.0);
    } else {
      const double up = (s + 2.0 + gamma * zi) / (2.0 + gamma);
      const double down = (s - 2.0 + gamma * zi) / (2.0 + gamma);
      if (up > 1.0) {
        y = up;
      } else if (down < -1.0) {
        y = down;
      } else {
        y = std::clamp(gamma > 0.0 ? zi + s / gamma : zi, -1.0, 1.0);
      }
    }
    return VectorXd::Constant(1, y);
  };
  return p;
}

VectorXd pt(std::initializer_list<double> v) {
  VectorXd out(static_cast<Index>(v.size()));
  Index k = 0;
  for (double e : v) out[k++] = e;
  return out;
}

}  // namespace

PathologyFixture build_pathology(std::string_view name, const PathologyOptions& options) {
  PathologyFixture fx;
  if (name == "ex2_l1_nonregular") {
    fx.problem = ex2_problem();
    fx.start = BlockVector({1, 1}, pt({-4.0, 3.0}));
    fx.expected.kind = BehaviorKind::stuck_point;
    fx.expected.points = {pt({-4.0, 3.0})};
  } else if (name == "ex4_coupling") {
    fx.problem = ex4_problem();
    fx.start = BlockVector({1, 1}, pt({0.0, 2.0}));
    fx.expected.kind = BehaviorKind::stuck_point;
    fx.expected.points = {pt({0.0, 2.0})};
    fx.expected.value = 4.0;
  } else if (name == "ex5_linear_bound") {
    fx.problem = two_block_square("ex5_linear_bound", 1.0);
    fx.problem.known_optimum =
        KnownOptimum{0.0, "derived: (x1 + x2)^2 >= 0 with equality on x1 = -x2"};
    fx.start = BlockVector({1, 1}, pt({1.0, 1.0}));
    fx.expected.kind = BehaviorKind::oscillation;
    fx.expected.period = 2;
    fx.expected.points = {pt({-1.0, -1.0}), pt({1.0, 1.0})};
    fx.expected.value = 4.0;
  } else if (name == "ex6_powell") {
    const double eps = options.powell_epsilon;
    if (!(eps > 0.0)) throw PreconditionError("Powell start offset must be positive");
    fx.problem = powell_problem();
    fx.start = BlockVector({1, 1, 1}, pt({-1.0 - eps, 1.0 + eps / 2.0, -1.0 - eps / 4.0}));
    fx.expected.kind = BehaviorKind::cycle;
    fx.expected.period = 6;
    fx.expected.points = {pt({1, 1, -1}),  pt({1, -1, -1}), pt({1, -1, 1}),
                          pt({-1, -1, 1}), pt({-1, 1, 1}),  pt({-1, 1, -1})};
  } else if (name == "naive_parallel") {
    fx.problem = two_block_square("naive_parallel", -1.0);
    fx.problem.known_optimum = KnownOptimum{0.0, "derived: (x1 - x2)^2 >= 0, zero on the diagonal"};
    fx.start = BlockVector({1, 1}, pt({1.0, -1.0}));
    fx.expected.kind = BehaviorKind::oscillation;
    fx.expected.period = 2;
    fx.expected.points = {pt({-1.0, 1.0}), pt({1.0, -1.0})};
    fx.expected.value = 4.0;
  } else {
    std::string valid;
    for (const auto& n : pathology_names()) valid += (valid.empty() ? "" : ", ") + n;
    throw PreconditionError("unknown pathology '" + std::string(name) + "'; valid names: " + valid);
  }
  fx.problem.validate();
  return fx;
}

}  // namespace bsum
