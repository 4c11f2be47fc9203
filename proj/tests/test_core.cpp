#include <cmath>
#include <sstream>

#include "doctest.h"
#include "helpers.hpp"

#include "bsumkit/errors.hpp"
#include "bsumkit/matrix_market.hpp"
#include "bsumkit/pathology.hpp"
#include "bsumkit/problem.hpp"
#include "bsumkit/solvers/lasso.hpp"
#include "bsumkit/trace.hpp"

using namespace bsum;
using testutil::vec;

namespace {

// Simplex projection by bisection on the threshold; independent of the
// sorting algorithm in the library.
VectorXd simplex_by_bisection(const VectorXd& v) {
  double lo = v.minCoeff() - 1.0, hi = v.maxCoeff();
  for (int k = 0; k < 200; ++k) {
    const double tau = 0.5 * (lo + hi);
    const double s = (v.array() - tau).max(0.0).sum();
    (s > 1.0 ? lo : hi) = tau;
  }
  return (v.array() - 0.5 * (lo + hi)).max(0.0).matrix();
}

Problem lasso_like(const MatrixXd& A, const VectorXd& b) {
  return make_lasso_problem(A, b, 0.3, {2, 3});
}

}  // namespace

TEST_SUITE("core") {

TEST_CASE("block vector flatten and unflatten are inverse") {
  std::mt19937_64 rng(1);
  for (const std::vector<Index>& dims :
       {std::vector<Index>{1}, std::vector<Index>{3, 1, 2}, std::vector<Index>{5, 5}, std::vector<Index>{1, 1, 1, 1}}) {
    Index total = 0;
    for (Index d : dims) total += d;
    const VectorXd flat = testutil::gaussian(total, rng);
    const BlockVector x(dims, flat);
    const auto blocks = x.unflatten();
    REQUIRE(blocks.size() == dims.size());
    const BlockVector y = BlockVector::from_blocks(blocks);
    CHECK(y.dims() == dims);
    CHECK(y.flat() == flat);
    Index off = 0;
    for (Index i = 0; i < x.num_blocks(); ++i) {
      CHECK(x.offset(i) == off);
      CHECK(x.block(i) == flat.segment(off, dims[static_cast<std::size_t>(i)]));
      off += x.dim(i);
    }
  }
}

TEST_CASE("block vector rejects bad shapes") {
  CHECK_THROWS_AS(BlockVector({2, 0}), DimensionError);
  CHECK_THROWS_AS(BlockVector({2, 1}, VectorXd::Zero(4)), DimensionError);
  const BlockVector x({2, 1});
  CHECK_THROWS_AS(x.block(2), DimensionError);
  CHECK_THROWS_AS(x.with_block(0, VectorXd::Zero(3)), DimensionError);
  const BlockVector y = x.with_block(1, vec({7.0}));
  CHECK(y.flat() == vec({0.0, 0.0, 7.0}));
}

TEST_CASE("projection examples") {
  CHECK(FeasibleSet::box(1, -1.0, 1.0).project(vec({2.0})) == vec({1.0}));
  CHECK((FeasibleSet::simplex(2).project(vec({0.3, 0.7})) - vec({0.3, 0.7})).norm() < 1e-15);
  CHECK((FeasibleSet::ball(2, 1.0).project(vec({3.0, 4.0})) - vec({0.6, 0.8})).norm() < 1e-15);
  CHECK(FeasibleSet::nonneg(3).project(vec({-1.0, 0.0, 2.0})) == vec({0.0, 0.0, 2.0}));
  CHECK_THROWS_AS(FeasibleSet::box(2, -1.0, 1.0).project(vec({1.0})), DimensionError);
}

TEST_CASE("simplex projection matches a bisection oracle") {
  std::mt19937_64 rng(2);
  const FeasibleSet s = FeasibleSet::simplex(7);
  for (int k = 0; k < 200; ++k) {
    const VectorXd v = 2.0 * testutil::gaussian(7, rng);
    const VectorXd p = s.project(v);
    CHECK((p - simplex_by_bisection(v)).norm() < 1e-10);
    CHECK(std::abs(p.sum() - 1.0) < 1e-12);
    CHECK(p.minCoeff() >= 0.0);
  }
}

TEST_CASE("projections are idempotent and nonexpansive") {
  std::mt19937_64 rng(3);
  std::uniform_int_distribution<int> pick(0, 4);
  for (int k = 0; k < 1000; ++k) {
    const Index n = 4;
    FeasibleSet set = FeasibleSet::unconstrained(n);
    switch (pick(rng)) {
      case 0: set = FeasibleSet::box(vec({-1.0, 0.0, -2.0, 0.5}), vec({1.0, 0.1, 3.0, 0.5})); break;
      case 1: set = FeasibleSet::nonneg(n); break;
      case 2: set = FeasibleSet::ball(n, 0.7); break;
      case 3: set = FeasibleSet::simplex(n); break;
      default: break;
    }
    const VectorXd v = 3.0 * testutil::gaussian(n, rng);
    const VectorXd w = 3.0 * testutil::gaussian(n, rng);
    const VectorXd pv = set.project(v);
    CHECK((set.project(pv) - pv).norm() <= 1e-12);
    CHECK((pv - set.project(w)).norm() <= (v - w).norm() + 1e-10);
    CHECK(set.contains(pv, 1e-12));
  }
}

TEST_CASE("soft threshold and l1 prox") {
  CHECK(soft_threshold(vec({3.0, -0.2, -2.0}), 0.5) == vec({2.5, 0.0, -1.5}));
  const Nonsmooth h = Nonsmooth::l1(2.0);
  CHECK(h.value(vec({1.0, -3.0})) == doctest::Approx(8.0));
  CHECK(h.prox(vec({1.0, -3.0}), 0.25) == vec({0.5, -2.5}));
  // Over the orthant the l1 prox shifts and clips.
  CHECK(prox_onto(h, FeasibleSet::nonneg(2), vec({1.0, -3.0}), 0.25) == vec({0.5, 0.0}));
  CHECK_THROWS_AS(Nonsmooth::l1(-1.0), PreconditionError);
}

TEST_CASE("objective evaluation examples") {
  const auto ex2 = build_pathology("ex2_l1_nonregular");
  CHECK(eval_objective(ex2.problem, BlockVector({1, 1}, vec({-4.0, 3.0}))) == doctest::Approx(5.0));
  const auto ex4 = build_pathology("ex4_coupling");
  CHECK(eval_objective(ex4.problem, ex4.start) == 4.0);

  std::mt19937_64 rng(4);
  const MatrixXd A = testutil::gaussian(6, 5, rng);
  const VectorXd b = testutil::gaussian(6, rng);
  const Problem p = lasso_like(A, b);
  CHECK(eval_objective(p, p.zeros()) == doctest::Approx(0.5 * b.squaredNorm()));
}

TEST_CASE("block gradients") {
  Problem p = make_problem("coupled square", {1, 1});
  p.smooth = [](const BlockVector& x) {
    const double s = x.flat().sum();
    return s * s;
  };
  p.gradient = [](const BlockVector& x, Index) -> VectorXd { return VectorXd::Constant(1, 2.0 * x.flat().sum()); };
  CHECK(eval_block_gradient(p, 0, BlockVector({1, 1}, vec({1.0, -1.0})))[0] == 0.0);

  std::mt19937_64 rng(5);
  const MatrixXd A = testutil::gaussian(6, 5, rng);
  const VectorXd b = testutil::gaussian(6, rng);
  const Problem lp = lasso_like(A, b);
  const BlockVector x({2, 3}, testutil::gaussian(5, rng));
  // Central differences of 0.5||Ax - b||^2.
  const double h = 1e-6;
  for (Index i = 0; i < 2; ++i) {
    const VectorXd g = eval_block_gradient(lp, i, x);
    for (Index j = 0; j < x.dim(i); ++j) {
      BlockVector up = x, dn = x;
      up.block(i)[j] += h;
      dn.block(i)[j] -= h;
      const double fd = (eval_smooth(lp, up) - eval_smooth(lp, dn)) / (2 * h);
      CHECK(g[j] == doctest::Approx(fd).epsilon(1e-6));
    }
  }

  Problem flat = make_problem("constant", {2});
  flat.smooth = [](const BlockVector&) { return 3.0; };
  flat.gradient = [](const BlockVector&, Index) -> VectorXd { return VectorXd::Zero(2); };
  CHECK(eval_gradient(flat, flat.zeros()).isZero());

  Problem nograd = make_problem("no gradient", {1});
  nograd.smooth = [](const BlockVector& x) { return std::abs(x.flat()[0]); };
  CHECK_THROWS_AS(eval_block_gradient(nograd, 0, nograd.zeros()), UnsupportedOperation);
}

TEST_CASE("directional derivative examples") {
  const auto ex2 = build_pathology("ex2_l1_nonregular");
  const BlockVector x({1, 1}, vec({-4.0, 3.0}));
  CHECK(directional_derivative(ex2.problem, x, vec({4.0, -3.0})) == doctest::Approx(-5.0).epsilon(1e-8));
  CHECK(directional_derivative(ex2.problem, x, vec({1.0, 0.0})) == doctest::Approx(1.0).epsilon(1e-8));
  CHECK(directional_derivative(ex2.problem, x, vec({0.0, 1.0})) == doctest::Approx(3.0).epsilon(1e-8));

  Problem sq = make_problem("sq", {1, 1});
  sq.smooth = [](const BlockVector& v) { return v.flat().squaredNorm(); };
  CHECK(directional_derivative(sq, BlockVector({1, 1}, vec({1.0, 0.0})), vec({1.0, 0.0})) ==
        doctest::Approx(2.0).epsilon(1e-6));
}

TEST_CASE("directional derivative matches the gradient on smooth problems") {
  std::mt19937_64 rng(6);
  const MatrixXd A = testutil::gaussian(6, 5, rng);
  const VectorXd b = testutil::gaussian(6, rng);
  Problem p = make_problem("ls", {2, 3});
  p.smooth = [A, b](const BlockVector& x) { return 0.5 * (A * x.flat() - b).squaredNorm(); };
  for (int k = 0; k < 50; ++k) {
    const BlockVector x({2, 3}, testutil::gaussian(5, rng));
    const VectorXd d = testutil::gaussian(5, rng);
    const double exact = (A.transpose() * (A * x.flat() - b)).dot(d);
    const double dd = directional_derivative(p, x, d);
    CHECK(std::abs(dd - exact) <= 1e-4 * std::max(1.0, std::abs(exact)));
  }
}

TEST_CASE("directional derivative leaving the domain is an error") {
  Problem p = make_problem("boxed", {1});
  p.sets = {FeasibleSet::box(1, 0.0, 1.0)};
  p.smooth = [](const BlockVector& x) { return x.flat()[0]; };
  CHECK_THROWS_AS(directional_derivative(p, BlockVector({1}, vec({1.0})), vec({1.0})), InfeasibleError);
}

TEST_CASE("pathology fixtures") {
  for (const auto& name : pathology_names()) {
    const auto fx = build_pathology(name);
    CHECK_MESSAGE(fx.problem.is_feasible(fx.start), name);
  }
  const auto ex4 = build_pathology("ex4_coupling");
  REQUIRE(ex4.problem.known_optimum);
  CHECK(ex4.problem.known_optimum->value == 2.0);
  CHECK(ex4.problem.known_optimum->provenance.rfind("reference:", 0) == 0);
  CHECK(ex4.expected.kind == BehaviorKind::stuck_point);

  const auto powell = build_pathology("ex6_powell");
  CHECK(powell.expected.kind == BehaviorKind::cycle);
  CHECK(powell.expected.points.size() == 6);
  const double e = 1e-2;
  CHECK((powell.start.flat() - vec({-1 - e, 1 + e / 2, -1 - e / 4})).norm() < 1e-15);

  const auto naive = build_pathology("naive_parallel");
  CHECK(naive.expected.period == 2);
  CHECK(naive.start.flat() == vec({1.0, -1.0}));

  try {
    build_pathology("nope");
    FAIL("expected an error");
  } catch (const PreconditionError& err) {
    CHECK(std::string(err.what()).find("ex6_powell") != std::string::npos);
  }
}

TEST_CASE("weighted absolute value minimizer") {
  // |x - 1| + 2|x + 1|: minimized at -1.
  CHECK(minimize_weighted_abs_1d({1.0, 2.0}, {1.0, -1.0}, 0.0, 5.0, -10, 10) == -1.0);
  // Flat interval [-1, 1] for |x - 1| + |x + 1|: nearest to z.
  CHECK(minimize_weighted_abs_1d({1.0, 1.0}, {1.0, -1.0}, 0.0, 0.3, -10, 10) == 0.3);
  CHECK(minimize_weighted_abs_1d({1.0, 1.0}, {1.0, -1.0}, 0.0, 4.0, -10, 10) == 1.0);
  // |x| + 0.5 (x - 3)^2: x = 2.
  CHECK(minimize_weighted_abs_1d({1.0}, {0.0}, 1.0, 3.0, -10, 10) == doctest::Approx(2.0));
}

TEST_CASE("coupled slice view") {
  const auto ex4 = build_pathology("ex4_coupling");
  const Problem slice = coupled_slice_view(ex4.problem);
  CHECK_FALSE(slice.coupling.has_value());
  // Each block is pinned by the other: x1 = 2 - x2.
  const VectorXd y = slice.block_solver(ex4.start, 0, 0.0);
  CHECK(y[0] == doctest::Approx(0.0));
}

TEST_CASE("matrix market round trip") {
  std::mt19937_64 rng(7);
  const MatrixXd m = testutil::gaussian(4, 3, rng);
  std::stringstream ss;
  write_matrix_market(ss, m);
  CHECK(read_matrix_market(ss) == m);

  Eigen::MatrixXcd c(2, 2);
  c << std::complex<double>(1, -2), std::complex<double>(0.5, 0), std::complex<double>(-3, 1e-7),
      std::complex<double>(0, 4);
  std::stringstream sc;
  write_matrix_market(sc, c);
  CHECK(read_matrix_market_complex(sc) == c);

  TensorData t;
  t.dims = {2, 3, 2};
  t.unfolding = testutil::gaussian(2, 6, rng);
  std::stringstream st;
  write_tensor(st, t);
  const TensorData u = read_tensor(st);
  CHECK(u.dims == t.dims);
  CHECK(u.unfolding == t.unfolding);

  std::stringstream bad("%%MatrixMarket matrix coordinate real general\n1 1 1\n1 1 2\n");
  CHECK_THROWS_AS(read_matrix_market(bad), ConfigError);
}

TEST_CASE("trace csv round trip") {
  Trace t;
  TraceRecord a;
  a.r = 0;
  a.f = 1.0 / 3.0;
  TraceRecord b;
  b.r = 1;
  b.blocks = {0, 2};
  b.f = 0.1;
  b.step_norm = 2.5e-17;
  b.stat_gap = 1e-3;
  t.records = {a, b};
  const std::string csv = t.to_csv();
  CHECK(csv.rfind(std::string(kTraceHeader) + "\n", 0) == 0);
  CHECK(csv.find("\n1,1+3,") != std::string::npos);
  std::istringstream in(csv);
  const Trace back = Trace::read_csv(in);
  REQUIRE(back.records.size() == 2);
  CHECK(back.records[0].f == a.f);
  CHECK(back.records[1].blocks == b.blocks);
  CHECK(back.records[1].step_norm == b.step_norm);
  CHECK(back.records[1].stat_gap == b.stat_gap);
  CHECK_FALSE(back.records[1].feas_residual.has_value());
  CHECK(back.to_csv() == csv);
}

}  // TEST_SUITE
