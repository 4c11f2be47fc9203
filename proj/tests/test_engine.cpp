#include <array>
#include <cmath>

#include "doctest.h"
#include "helpers.hpp"

#include "bsumkit/diagnostics.hpp"
#include "bsumkit/engine.hpp"
#include "bsumkit/errors.hpp"
#include "bsumkit/pathology.hpp"
#include "bsumkit/solvers/lasso.hpp"
#include "bsumkit/solvers/nmf.hpp"

using namespace bsum;
using testutil::vec;

namespace {

StopCriteria iters(std::size_t n) {
  StopCriteria s;
  s.max_iters = n;
  s.objective_rel_change_tol = 0.0;
  s.stationarity_tol = 0.0;
  return s;
}

struct Lasso {
  MatrixXd A;
  VectorXd b;
  double lambda;
  std::vector<Index> sizes;
  Problem problem;
  std::vector<Surrogate> surr;
};

Lasso small_lasso(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  Lasso l;
  l.A = testutil::gaussian(20, 12, rng);
  l.b = testutil::gaussian(20, rng);
  l.lambda = 0.5;
  l.sizes = {4, 4, 4};
  l.problem = make_lasso_problem(l.A, l.b, l.lambda, l.sizes);
  for (double L : lasso_block_lipschitz(l.A, l.sizes)) l.surr.push_back(Surrogate::quadratic(L));
  return l;
}

// f = sum_i 0.5 x_i'Q_i x_i + c_i'x_i with coupling sum_i A_i x_i = b.
struct CoupledQp {
  std::vector<MatrixXd> Q;
  std::vector<VectorXd> c;
  Problem problem;
};

CoupledQp coupled_qp(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  CoupledQp qp;
  const Index d = 2, m = 2;
  Coupling cp;
  for (int i = 0; i < 3; ++i) {
    const MatrixXd G = testutil::gaussian(d, d, rng);
    qp.Q.push_back(G * G.transpose() + MatrixXd::Identity(d, d));
    qp.c.push_back(testutil::gaussian(d, rng));
    cp.A.push_back(testutil::gaussian(m, d, rng));
  }
  cp.b = testutil::gaussian(m, rng);
  qp.problem = make_problem("coupled qp", {d, d, d});
  const auto Q = qp.Q;
  const auto c = qp.c;
  qp.problem.smooth = [Q, c](const BlockVector& x) {
    double f = 0.0;
    for (Index i = 0; i < 3; ++i) {
      const auto ui = static_cast<std::size_t>(i);
      f += 0.5 * x.block(i).dot(Q[ui] * x.block(i)) + c[ui].dot(x.block(i));
    }
    return f;
  };
  qp.problem.gradient = [Q, c](const BlockVector& x, Index i) -> VectorXd {
    const auto ui = static_cast<std::size_t>(i);
    return Q[ui] * x.block(i) + c[ui];
  };
  qp.problem.coupling = cp;
  return qp;
}

}  // namespace

TEST_SUITE("engine") {

TEST_CASE("stop criteria validation") {
  StopCriteria s;
  CHECK_NOTHROW(s.validate());
  s.max_iters = 0;
  CHECK_THROWS_AS(s.validate(), PreconditionError);
  s.max_iters = 10;
  s.stationarity_tol = -1.0;
  CHECK_THROWS_AS(s.validate(), PreconditionError);
}

TEST_CASE("stop monitor waits until every block was tried") {
  StopCriteria s;
  s.stationarity_tol = 0.0;
  StopMonitor m(s, 2, 1e-6);
  m.track_blocks(2);
  m.start(1.0);
  // Block 0 keeps being drawn and does not move; block 1 was never tried.
  for (std::size_t r = 1; r <= 10; ++r) {
    m.touch(r, {0});
    CHECK_FALSE(m.update(r, 1.0, 0.0, 1.0, std::nullopt).has_value());
  }
  m.touch(11, {1});
  const auto st = m.update(11, 1.0, 0.0, 1.0, std::nullopt);
  REQUIRE(st.has_value());
  CHECK(*st == TerminalStatus::converged);
}

TEST_CASE("stop monitor keeps a moving iterate with flat objective running") {
  StopCriteria s;
  s.stationarity_tol = 1e-9;
  StopMonitor m(s, 1, 1e-6);
  m.start(0.0);
  for (std::size_t r = 1; r <= 10; ++r) CHECK_FALSE(m.update(r, 0.0, 1.0, 1.0, std::nullopt).has_value());
  CHECK(m.update(11, 0.0, 0.0, 1.0, std::nullopt) == TerminalStatus::converged);
  CHECK(m.update(12, 0.0, 1.0, 1.0, 1e-12) == TerminalStatus::converged);
}

TEST_CASE("bsum rejects coupled problems and infeasible starts") {
  const auto ex4 = build_pathology("ex4_coupling");
  CHECK_THROWS_AS(run_bsum(ex4.problem, {Surrogate::exact()}, SelectionRule::cyclic(2), iters(10)),
                  PreconditionError);
  const auto ex5 = build_pathology("ex5_linear_bound");
  CHECK_THROWS_AS(run_bsum(ex5.problem, {Surrogate::exact()}, SelectionRule::cyclic(2), iters(10),
                           BlockVector({1, 1}, vec({3.0, 0.0}))),
                  InfeasibleError);
  CHECK_THROWS_AS(run_bsum(ex5.problem, {Surrogate::exact()}, SelectionRule::cyclic(3), iters(10)), DimensionError);
}

TEST_CASE("powell example cycles under exact cyclic updates") {
  const auto fx = build_pathology("ex6_powell");
  const auto run = run_bsum(fx.problem, {Surrogate::exact()}, SelectionRule::cyclic(3), iters(1000), fx.start);
  CHECK(run.trace.status == TerminalStatus::detected_cycle);
  REQUIRE(run.trace.cycle.size() == 6);
  for (const auto& pattern : fx.expected.points) {
    double best = INFINITY;
    for (const auto& p : run.trace.cycle) best = std::min(best, (p - pattern).norm());
    CHECK(best <= 0.1);
  }
}

TEST_CASE("monotone descent with valid surrogates") {
  const auto l = small_lasso(31);
  for (auto rule : {SelectionRule::cyclic(3), SelectionRule::gauss_southwell(3), SelectionRule::mbi(3),
                    SelectionRule::randomized(3, 4), SelectionRule::essentially_cyclic(3, 2)}) {
    const auto run = run_bsum(l.problem, l.surr, rule, iters(300));
    CHECK_MESSAGE(verify_monotone_descent(run.trace, 1e-12).passed, rule.describe());
  }
  std::mt19937_64 rng(32);
  const MatrixXd V = testutil::gaussian(8, 6, rng).cwiseAbs();
  const Problem nmf = make_nmf_problem(V, 2);
  const auto run = run_bsum(nmf, {nmf_surrogate(V, 2)}, SelectionRule::cyclic(2), iters(200),
                            nmf_pack(nmf_default_init(8, 6, 2, 1)));
  CHECK(verify_monotone_descent(run.trace, 1e-12).passed);
}

TEST_CASE("bsum runs are deterministic") {
  const auto l = small_lasso(33);
  auto a = run_bsum(l.problem, l.surr, SelectionRule::randomized(3, 8), iters(200));
  auto b = run_bsum(l.problem, l.surr, SelectionRule::randomized(3, 8), iters(200));
  CHECK(a.trace.to_csv() == b.trace.to_csv());
  CHECK(a.x.flat() == b.x.flat());
}

TEST_CASE("trace bookkeeping") {
  const auto l = small_lasso(34);
  EngineOptions o;
  o.gap_interval = 4;
  std::size_t seen = 0;
  o.observer = [&](std::size_t, const BlockVector&) { ++seen; };
  const auto run = run_bsum(l.problem, l.surr, SelectionRule::cyclic(3), iters(12), std::nullopt, o);
  REQUIRE(run.trace.records.size() == 13);
  CHECK(seen == 13);
  CHECK(run.trace.status == TerminalStatus::max_iters);
  for (std::size_t k = 0; k < run.trace.records.size(); ++k) {
    CHECK(run.trace.records[k].r == k);
    CHECK(run.trace.records[k].stat_gap.has_value() == (k % 4 == 0));
  }
  CHECK(run.trace.records[5].blocks == std::vector<Index>{1});
}

TEST_CASE("psca with unit steps equals bsum") {
  const auto l = small_lasso(35);
  const auto a = run_bsum(l.problem, l.surr, SelectionRule::cyclic(3), iters(150));
  const auto b = run_psca(l.problem, l.surr, StepsizeSchedule::constant(1.0), SelectionRule::cyclic(3), iters(150));
  REQUIRE(a.trace.records.size() == b.trace.records.size());
  for (std::size_t k = 0; k < a.trace.records.size(); ++k) {
    CHECK(std::abs(a.trace.records[k].f - b.trace.records[k].f) <= 1e-12);
    CHECK(a.trace.records[k].blocks == b.trace.records[k].blocks);
  }
}

TEST_CASE("psca on the parallel example") {
  const auto fx = build_pathology("naive_parallel");
  StopCriteria stop;
  stop.max_iters = 1000;
  const auto naive = run_psca(fx.problem, {Surrogate::exact()}, StepsizeSchedule::constant(1.0),
                              SelectionRule::all_blocks(2), stop, fx.start);
  CHECK(naive.trace.status == TerminalStatus::detected_cycle);
  REQUIRE(naive.trace.cycle.size() == 2);
  for (const auto& p : naive.trace.cycle) CHECK(std::abs(std::abs(p[0]) - 1.0) < 1e-12);

  const auto damped = run_psca(fx.problem, {Surrogate::exact()}, StepsizeSchedule::diminishing(1.0, 1.0, 2.0),
                               SelectionRule::all_blocks(2), iters(1000), fx.start);
  double fmin = INFINITY;
  for (const auto& r : damped.trace.records) fmin = std::min(fmin, r.f);
  CHECK(fmin <= 1e-6);

  CHECK_THROWS_AS(run_psca(fx.problem, {Surrogate::exact()}, StepsizeSchedule::constant(1.5),
                           SelectionRule::all_blocks(2), iters(10), fx.start),
                  PreconditionError);
}

TEST_CASE("step size schedules") {
  const auto d = StepsizeSchedule::diminishing();
  CHECK(d.at(1) == doctest::Approx(2.0 / 3.0));
  CHECK(d.at(8) == doctest::Approx(0.2));
  CHECK(StepsizeSchedule::diminishing(1.0, 0.5, 0.0).at(4) == doctest::Approx(0.5));
  CHECK_THROWS(StepsizeSchedule::constant(2.0).at_unit(1));
  CHECK(StepsizeSchedule::constant(0.3).at_unit(100) == 0.3);
}

TEST_CASE("ssum aggregate equals the stored average") {
  std::mt19937_64 rng(36);
  const MatrixXd A = testutil::gaussian(15, 4, rng);
  const VectorXd b = testutil::gaussian(15, rng);
  for (SurrogateKind fam : {SurrogateKind::quadratic, SurrogateKind::proximal}) {
    const auto stream = least_squares_stream(A, b, fam, 0.5, 7);
    std::vector<QuadraticModel> stored;
    double worst = 0.0;
    SsumOptions o;
    o.on_draw = [&](std::size_t, const QuadraticModel& m) { stored.push_back(m); };
    o.on_aggregate = [&](std::size_t r, const QuadraticModel& avg) {
      MatrixXd Q = MatrixXd::Zero(4, 4);
      VectorXd q = VectorXd::Zero(4);
      double c = 0.0;
      for (const auto& m : stored) {
        Q += m.Q;
        q += m.q;
        c += m.c;
      }
      Q /= double(r);
      q /= double(r);
      c /= double(r);
      worst = std::max({worst, (Q - avg.Q).cwiseAbs().maxCoeff(), (q - avg.q).cwiseAbs().maxCoeff(),
                        std::abs(c - avg.c)});
    };
    run_ssum(stream, {FeasibleSet::unconstrained(4)}, iters(100), std::nullopt, o);
    CHECK(stored.size() == 100);
    CHECK(worst <= 1e-10);
  }
}

TEST_CASE("ssum with a degenerate stream is plain MM") {
  // Every draw is the same exact quadratic model of f = 0.5 x'Hx + g'x.
  std::mt19937_64 rng(37);
  const MatrixXd G = testutil::gaussian(3, 3, rng);
  const MatrixXd H = G * G.transpose() + MatrixXd::Identity(3, 3);
  const VectorXd g = testutil::gaussian(3, rng);
  StochasticStream s;
  s.family = SurrogateKind::quadratic;
  s.dims = {3};
  s.draw = [H, g](const VectorXd&, std::mt19937_64&) { return QuadraticModel{H, g, 0.0}; };
  const FeasibleSet box = FeasibleSet::box(3, -0.2, 0.2);
  const auto ss = run_ssum(s, {box}, iters(20));

  Problem p = make_problem("qp", {3});
  p.sets = {box};
  p.smooth = [H, g](const BlockVector& x) { return 0.5 * x.flat().dot(H * x.flat()) + g.dot(x.flat()); };
  p.gradient = [H, g](const BlockVector& x, Index) -> VectorXd { return H * x.flat() + g; };
  p.block_solver = {};
  const double L = Eigen::SelfAdjointEigenSolver<MatrixXd>(H).eigenvalues().maxCoeff();
  Surrogate exact_model = Surrogate::quadratic_matrix(H);
  const auto mm = run_bsum(p, {exact_model}, SelectionRule::cyclic(1), iters(20));
  REQUIRE(ss.trace.records.size() + 1 == mm.trace.records.size());
  for (std::size_t k = 0; k < ss.trace.records.size(); ++k) {
    CHECK(std::abs(ss.trace.records[k].f - mm.trace.records[k + 1].f) <= 1e-9 * std::max(1.0, L));
  }
  CHECK((ss.x.flat() - mm.x.flat()).norm() <= 1e-9);
}

TEST_CASE("ssum on a fixed pool converges to least squares") {
  std::mt19937_64 rng(38);
  const MatrixXd A = testutil::gaussian(30, 3, rng);
  const VectorXd b = A * testutil::gaussian(3, rng) + 1e-3 * testutil::gaussian(30, rng);
  const VectorXd xs = (A.transpose() * A).ldlt().solve(A.transpose() * b);
  const auto run = run_ssum(least_squares_stream(A, b, SurrogateKind::quadratic, 0.0, 3),
                            {FeasibleSet::unconstrained(3)}, iters(10000));
  CHECK((run.x.flat() - xs).norm() <= 1e-3);
}

TEST_CASE("ssum rejects families it cannot aggregate") {
  StochasticStream s;
  s.family = SurrogateKind::linear;
  s.dims = {1};
  s.draw = [](const VectorXd&, std::mt19937_64&) { return QuadraticModel{MatrixXd::Ones(1, 1), VectorXd::Zero(1), 0.0}; };
  CHECK_THROWS_AS(run_ssum(s, {FeasibleSet::unconstrained(1)}, iters(5)), UnsupportedOperation);
  CHECK_THROWS_AS(least_squares_stream(MatrixXd::Ones(2, 1), VectorXd::Ones(2), SurrogateKind::jensen, 1.0, 0),
                  UnsupportedOperation);
}

TEST_CASE("bsumm on the coupled example") {
  const auto fx = build_pathology("ex4_coupling");
  StopCriteria stop;
  stop.max_iters = 10000;
  stop.objective_rel_change_tol = 1e-12;
  stop.stationarity_tol = 1e-9;
  const auto run = run_bsumm(fx.problem, {Surrogate::proximal(1.0)}, 1.0, SelectionRule::cyclic(2), stop, fx.start);
  CHECK(eval_objective(fx.problem, run.x) == doctest::Approx(2.0).epsilon(1e-6));
  CHECK(coupling_residual(*fx.problem.coupling, run.x) <= 1e-6);
  CHECK((run.x.flat() - vec({1.0, 1.0})).norm() <= 1e-5);

  const auto l = small_lasso(39);
  CHECK_THROWS_AS(run_bsumm(l.problem, l.surr, 1.0, SelectionRule::cyclic(3), stop), PreconditionError);
}

TEST_CASE("bsumm with a vanishing coupling is bsum") {
  auto qp = coupled_qp(40);
  auto& cp = *qp.problem.coupling;
  for (auto& A : cp.A) A.setZero();
  cp.b.setZero();
  std::vector<BlockVector> mm_iterates, plain_iterates;
  BsummOptions o;
  o.engine.observer = [&](std::size_t, const BlockVector& x) { mm_iterates.push_back(x); };
  const auto mm = run_bsumm(qp.problem, {Surrogate::proximal(1.0)}, 1.0, SelectionRule::cyclic(3), iters(20),
                            std::nullopt, o);
  CHECK(mm.lambda.isZero(0.0));

  Problem plain = qp.problem;
  plain.coupling.reset();
  EngineOptions eo;
  eo.observer = [&](std::size_t, const BlockVector& x) { plain_iterates.push_back(x); };
  run_bsum(plain, {Surrogate::proximal(1.0)}, SelectionRule::cyclic(3), iters(60), std::nullopt, eo);
  REQUIRE(mm_iterates.size() == 21);
  for (std::size_t r = 0; r < mm_iterates.size(); ++r) {
    CHECK((mm_iterates[r].flat() - plain_iterates[3 * r].flat()).norm() <= 1e-9);
  }
}

TEST_CASE("bsumm matches the KKT solution of a coupled QP") {
  const auto qp = coupled_qp(41);
  const auto& cp = *qp.problem.coupling;
  // [Q A'; A 0] [x; y] = [-c; b]
  const Index n = 6, m = 2;
  MatrixXd K = MatrixXd::Zero(n + m, n + m);
  VectorXd rhs(n + m);
  for (Index i = 0; i < 3; ++i) {
    const auto ui = static_cast<std::size_t>(i);
    K.block(2 * i, 2 * i, 2, 2) = qp.Q[ui];
    K.block(n, 2 * i, m, 2) = cp.A[ui];
    K.block(2 * i, n, 2, m) = cp.A[ui].transpose();
    rhs.segment(2 * i, 2) = -qp.c[ui];
  }
  rhs.tail(m) = cp.b;
  const VectorXd sol = K.fullPivLu().solve(rhs);

  StopCriteria stop;
  stop.max_iters = 20000;
  stop.objective_rel_change_tol = 1e-14;
  stop.stationarity_tol = 1e-10;
  Surrogate s = Surrogate::proximal(1.0);
  s.budget = InnerSolverBudget{10000, 1e-12};
  const auto run = run_bsumm(qp.problem, {s}, 1.0, SelectionRule::cyclic(3), stop);
  CHECK((run.x.flat() - sol.head(n)).norm() <= 1e-5);
}

}  // TEST_SUITE
