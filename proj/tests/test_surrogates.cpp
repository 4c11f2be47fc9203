#include <cmath>

#include "doctest.h"
#include "helpers.hpp"

#include "bsumkit/errors.hpp"
#include "bsumkit/pathology.hpp"
#include "bsumkit/solvers/lasso.hpp"
#include "bsumkit/solvers/nmf.hpp"
#include "bsumkit/surrogate.hpp"

using namespace bsum;
using testutil::vec;

namespace {

Problem scalar_problem(std::function<double(double)> g, std::function<double(double)> dg) {
  Problem p = make_problem("scalar", {1});
  p.smooth = [g](const BlockVector& x) { return g(x.flat()[0]); };
  p.gradient = [dg](const BlockVector& x, Index) -> VectorXd { return VectorXd::Constant(1, dg(x.flat()[0])); };
  return p;
}

BlockVector point(std::initializer_list<double> v, std::vector<Index> dims = {}) {
  const VectorXd flat = vec(v);
  if (dims.empty()) dims = {flat.size()};
  return BlockVector(dims, flat);
}

// g(x) = log(1 + exp(a1'x1 + a2'x2)) + (a1'x1)^2, convex in the inner products.
Problem jensen_problem(std::mt19937_64& rng) {
  const VectorXd a1 = testutil::gaussian(3, rng);
  VectorXd a2 = testutil::gaussian(2, rng);
  a2[1] = 0.0;  // a zero coefficient is excluded from the weights
  auto outer = [](const VectorXd& t) { return std::log1p(std::exp(t[0] + t[1])) + t[0] * t[0]; };
  Problem p = make_problem("jensen", {3, 2});
  p.smooth = [=](const BlockVector& x) {
    return outer(vec({a1.dot(x.block(0)), a2.dot(x.block(1))}));
  };
  p.gradient = [=](const BlockVector& x, Index i) -> VectorXd {
    const double t0 = a1.dot(x.block(0)), t1 = a2.dot(x.block(1));
    const double sig = 1.0 / (1.0 + std::exp(-(t0 + t1)));
    return i == 0 ? VectorXd((sig + 2.0 * t0) * a1) : VectorXd(sig * a2);
  };
  p.jensen = JensenStructure{{a1, a2}, outer};
  return p;
}

}  // namespace

TEST_SUITE("surrogates") {

TEST_CASE("surrogate value examples") {
  const Problem sq = scalar_problem([](double x) { return x * x; }, [](double x) { return 2 * x; });
  const BlockVector z = point({1.0});
  CHECK(surrogate_value(Surrogate::proximal(2.0), sq, 0, vec({1.0}), z) == 1.0);
  // L = 1/beta = 2: g(z) + g'(z)(x - z) + (L/2)(x - z)^2 at x = 0.
  CHECK(surrogate_value(Surrogate::quadratic(2.0), sq, 0, vec({0.0}), z) == doctest::Approx(0.0));

  const Problem concave = scalar_problem([](double x) { return -x * x; }, [](double x) { return -2 * x; });
  const double u = surrogate_value(Surrogate::linear(), concave, 0, vec({3.0}), point({0.0}));
  CHECK(u == 0.0);
  CHECK(u >= eval_objective(concave, point({3.0})));
}

TEST_CASE("linear surrogate needs a gradient") {
  Problem p = make_problem("abs", {1});
  p.smooth = [](const BlockVector& x) { return std::abs(x.flat()[0]); };
  CHECK_THROWS_AS(surrogate_value(Surrogate::linear(), p, 0, vec({1.0}), point({0.0})), UnsupportedOperation);
  CHECK_THROWS_AS(minimize_block_surrogate(Surrogate::linear(), p, 0, point({0.0})), UnsupportedOperation);
}

TEST_CASE("quadratic surrogate with l1 gives the soft-threshold point") {
  Problem p = scalar_problem([](double x) { return x * x; }, [](double x) { return 2 * x; });
  p.nonsmooth = {Nonsmooth::l1(1.0)};
  // Forward point 1 - 0.5 * 2 = 0, shrink by 0.5.
  const VectorXd x = minimize_block_surrogate(Surrogate::quadratic(2.0), p, 0, point({1.0}));
  CHECK(x[0] == doctest::Approx(0.0));
}

TEST_CASE("quadratic minimizer is the forward-backward point on lasso") {
  std::mt19937_64 rng(11);
  const MatrixXd A = testutil::gaussian(12, 9, rng);
  const VectorXd b = testutil::gaussian(12, rng);
  const std::vector<Index> sizes{3, 3, 3};
  const double lambda = 0.4;
  const Problem p = make_lasso_problem(A, b, lambda, sizes);
  const auto L = lasso_block_lipschitz(A, sizes);
  for (int k = 0; k < 20; ++k) {
    const BlockVector z(sizes, testutil::gaussian(9, rng));
    for (Index i = 0; i < 3; ++i) {
      const double Li = L[static_cast<std::size_t>(i)];
      const VectorXd grad = (A.transpose() * (A * z.flat() - b)).segment(3 * i, 3);
      const VectorXd fb = soft_threshold(z.block(i) - grad / Li, lambda / Li);
      const VectorXd x = minimize_block_surrogate(Surrogate::quadratic(Li), p, i, z);
      CHECK((x - fb).norm() <= 1e-10);
    }
  }
}

TEST_CASE("proximal surrogate fixes a coordinatewise minimizer") {
  // f = (x1 - 1)^2 + (x2 + 2)^2 at its minimizer.
  Problem p = make_problem("sep", {1, 1});
  p.smooth = [](const BlockVector& x) {
    return std::pow(x.flat()[0] - 1, 2) + std::pow(x.flat()[1] + 2, 2);
  };
  p.gradient = [](const BlockVector& x, Index i) -> VectorXd {
    return VectorXd::Constant(1, 2 * (x.flat()[i] - (i == 0 ? 1.0 : -2.0)));
  };
  const BlockVector z({1, 1}, vec({1.0, -2.0}));
  for (Index i = 0; i < 2; ++i) {
    CHECK(minimize_block_surrogate(Surrogate::proximal(1.0), p, i, z)[0] == doctest::Approx(z.flat()[i]).epsilon(1e-9));
  }
}

TEST_CASE("minimizers are feasible and start the descent chain") {
  std::mt19937_64 rng(12);
  const MatrixXd V = testutil::gaussian(6, 5, rng).cwiseAbs();
  const Problem nmf = make_nmf_problem(V, 2);
  const Surrogate s = nmf_surrogate(V, 2);
  for (int k = 0; k < 20; ++k) {
    const BlockVector z = nmf_pack(nmf_default_init(6, 5, 2, 100 + static_cast<std::uint64_t>(k)));
    for (Index i = 0; i < 2; ++i) {
      const VectorXd xp = minimize_block_surrogate(s, nmf, i, z);
      CHECK(nmf.sets[static_cast<std::size_t>(i)].distance(xp) <= 1e-10);
      const double fz = eval_objective(nmf, z);
      const double u_plus = surrogate_value(s, nmf, i, xp, z);
      CHECK(eval_objective(nmf, z.with_block(i, xp)) <= u_plus + 1e-12 * std::max(1.0, fz));
      CHECK(u_plus <= surrogate_value(s, nmf, i, z.block(i), z) + 1e-12 * std::max(1.0, fz));
      CHECK(surrogate_value(s, nmf, i, z.block(i), z) == doctest::Approx(fz).epsilon(1e-12));
    }
  }
}

TEST_CASE("inner solver budget exceeded carries the best iterate") {
  // No block solver, so the proximal surrogate needs the inner loop.
  Problem p = make_problem("quartic", {2});
  p.smooth = [](const BlockVector& x) { return x.flat().array().pow(4).sum() + x.flat().prod(); };
  p.gradient = [](const BlockVector& x, Index) -> VectorXd {
    const VectorXd& v = x.flat();
    return vec({4 * std::pow(v[0], 3) + v[1], 4 * std::pow(v[1], 3) + v[0]});
  };
  Surrogate s = Surrogate::proximal(1.0);
  s.budget = InnerSolverBudget{1, 1e-15};
  try {
    minimize_block_surrogate(s, p, 0, BlockVector({2}, vec({2.0, -1.0})));
    FAIL("expected BudgetExceeded");
  } catch (const BudgetExceeded& e) {
    CHECK(e.best_iterate().size() == 2);
    CHECK(e.best_gap() > 0.0);
  }
}

TEST_CASE("validator accepts the proximal family and reports nonnegative slack") {
  const auto ex2 = build_pathology("ex2_l1_nonregular");
  const auto rep = validate_assumption_a(Surrogate::proximal(1.0), ex2.problem, ex2.start, 2000, 1);
  CHECK(rep.passed());
  CHECK(rep.a2_min_slack >= 0.0);
  CHECK(rep.a1_max_abs_gap <= 1e-12);
}

TEST_CASE("validator flags the linear bound on a convex function") {
  const Problem sq = scalar_problem([](double x) { return x * x; }, [](double x) { return 2 * x; });
  const auto rep = validate_assumption_a(Surrogate::linear(), sq, point({0.0}), 100, 2);
  CHECK_FALSE(rep.a2_pass);
  CHECK(rep.a1_pass);
  // The unit probe x = +-1 gives u = 0 against f = 1.
  CHECK(rep.a2_min_slack <= -1.0 + 1e-12);
  REQUIRE(rep.worst_a2_point);
  CHECK(std::abs((*rep.worst_a2_point)[0]) >= 1.0);
  CHECK(format_report(rep).find("FAIL") != std::string::npos);
}

TEST_CASE("validator on lasso with the quadratic family") {
  std::mt19937_64 rng(13);
  const MatrixXd A = testutil::gaussian(10, 6, rng);
  const VectorXd b = testutil::gaussian(10, rng);
  const std::vector<Index> sizes{2, 4};
  const Problem p = make_lasso_problem(A, b, 0.2, sizes);
  std::vector<Surrogate> surr;
  for (double L : lasso_block_lipschitz(A, sizes)) surr.push_back(Surrogate::quadratic(L));
  const BlockVector z(sizes, testutil::gaussian(6, rng));
  const auto rep = validate_assumption_a(surr, p, z, 10000, 3);
  CHECK(rep.passed());
  CHECK(rep.a2_min_slack >= -1e-9);
  CHECK(rep.a3_implied);

  // A curvature below the block Hessian breaks the bound.
  std::vector<Surrogate> weak;
  for (double L : lasso_block_lipschitz(A, sizes)) weak.push_back(Surrogate::quadratic(0.2 * L));
  CHECK_FALSE(validate_assumption_a(weak, p, z, 2000, 3).a2_pass);
}

TEST_CASE("jensen surrogate is tight and an upper bound") {
  std::mt19937_64 rng(14);
  const Problem p = jensen_problem(rng);
  const BlockVector z({3, 2}, testutil::gaussian(5, rng));
  const auto rep = validate_assumption_a(Surrogate::jensen(), p, z, 10000, 4);
  CHECK(rep.a1_max_abs_gap <= 1e-12);
  CHECK(rep.a2_min_slack >= -1e-9);
  CHECK(rep.passed());
}

TEST_CASE("estimated quadratic curvature covers the block Hessian") {
  std::mt19937_64 rng(15);
  const MatrixXd A = testutil::gaussian(8, 4, rng);
  const VectorXd b = testutil::gaussian(8, rng);
  const Problem p = make_lasso_problem(A, b, 0.0, {4});
  const double L = estimate_block_lipschitz(p, 0, p.zeros());
  const double top = Eigen::SelfAdjointEigenSolver<MatrixXd>(A.transpose() * A).eigenvalues().maxCoeff();
  CHECK(L == doctest::Approx(top).epsilon(1e-4));
  const auto rep = validate_assumption_a(Surrogate::quadratic_estimated(), p, p.zeros(), 2000, 5);
  CHECK(rep.passed());
}

TEST_CASE("per-block broadcast") {
  CHECK(per_block({Surrogate::exact()}, 3).size() == 3);
  CHECK(per_block({Surrogate::exact(), Surrogate::linear()}, 2)[1].kind() == SurrogateKind::linear);
  CHECK_THROWS(per_block({Surrogate::exact(), Surrogate::linear()}, 3));
}

}  // TEST_SUITE
