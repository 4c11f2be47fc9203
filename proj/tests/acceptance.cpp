// Acceptance checks, one result line per criterion. Usage:
//   bsumkit_acceptance            run all criteria
//   bsumkit_acceptance 4 7        run criteria 4 and 7
// Exit status is 0 when every selected criterion passes.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "bsumkit/diagnostics.hpp"
#include "bsumkit/engine.hpp"
#include "bsumkit/experiments.hpp"
#include "bsumkit/pathology.hpp"
#include "bsumkit/solvers/cp.hpp"
#include "bsumkit/solvers/em.hpp"
#include "bsumkit/solvers/irls.hpp"
#include "bsumkit/solvers/lasso.hpp"
#include "bsumkit/solvers/nmf.hpp"
#include "bsumkit/solvers/wmmse.hpp"

using namespace bsum;
namespace fs = std::filesystem;

namespace {

using Checks = std::vector<ExperimentCheck>;

std::string num(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

StopCriteria iters(std::size_t n) {
  StopCriteria s;
  s.max_iters = n;
  s.objective_rel_change_tol = 0.0;
  s.stationarity_tol = 0.0;
  return s;
}

MatrixXd gaussian(Index rows, Index cols, std::mt19937_64& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  MatrixXd m(rows, cols);
  for (Index k = 0; k < m.size(); ++k) m.data()[k] = g(rng);
  return m;
}

void append(Checks& out, const ExperimentReport& rep) {
  out.insert(out.end(), rep.checks.begin(), rep.checks.end());
}

// ---- 6: surrogate validator ----

Problem jensen_problem(std::mt19937_64& rng) {
  const VectorXd a1 = gaussian(3, 1, rng).col(0);
  const VectorXd a2 = gaussian(2, 1, rng).col(0);
  auto outer = [](const VectorXd& t) { return std::log1p(std::exp(t[0] + t[1])) + t[0] * t[0]; };
  Problem p = make_problem("jensen", {3, 2});
  p.smooth = [=](const BlockVector& x) {
    VectorXd t(2);
    t << a1.dot(x.block(0)), a2.dot(x.block(1));
    return outer(t);
  };
  p.gradient = [=](const BlockVector& x, Index i) -> VectorXd {
    const double t0 = a1.dot(x.block(0)), t1 = a2.dot(x.block(1));
    const double sig = 1.0 / (1.0 + std::exp(-(t0 + t1)));
    return i == 0 ? VectorXd((sig + 2.0 * t0) * a1) : VectorXd(sig * a2);
  };
  p.jensen = JensenStructure{{a1, a2}, outer};
  return p;
}

Checks criterion_06() {
  std::mt19937_64 rng(606);
  struct Case {
    std::string name;
    Problem problem;
    std::vector<Surrogate> surrogates;
    BlockVector z;
  };
  std::vector<Case> cases;

  const MatrixXd A = gaussian(20, 12, rng);
  const VectorXd b = gaussian(20, 1, rng).col(0);
  const std::vector<Index> sizes{4, 4, 4};
  const Problem lasso = make_lasso_problem(A, b, 0.3, sizes);
  const BlockVector zl(sizes, gaussian(12, 1, rng).col(0));
  std::vector<Surrogate> quad;
  for (double L : lasso_block_lipschitz(A, sizes)) quad.push_back(Surrogate::quadratic(L));
  cases.push_back({"lasso proximal", lasso, {Surrogate::proximal(1.0)}, zl});
  cases.push_back({"lasso quadratic", lasso, quad, zl});

  const MatrixXd V = gaussian(8, 6, rng).cwiseAbs();
  const Problem nmf = make_nmf_problem(V, 2);
  const BlockVector zn = nmf_pack(nmf_default_init(8, 6, 2, 5));
  cases.push_back({"nmf proximal", nmf, {Surrogate::proximal(1.0)}, zn});
  cases.push_back({"nmf quadratic (diagonal)", nmf, {nmf_surrogate(V, 2)}, zn});

  TensorData X;
  X.dims = {4, 3, 3};
  X.unfolding = gaussian(4, 9, rng);
  const Problem cp = make_cp_problem(X, 2);
  const BlockVector zc = cp_pack(cp_default_init(4, 3, 3, 2, 6));
  cases.push_back({"cp proximal", cp, {Surrogate::proximal(1.0)}, zc});
  cases.push_back({"cp quadratic (estimated)", cp, {Surrogate::quadratic_estimated()}, zc});

  const Problem jp = jensen_problem(rng);
  const BlockVector zj({3, 2}, gaussian(5, 1, rng).col(0));
  cases.push_back({"logistic jensen", jp, {Surrogate::jensen()}, zj});
  cases.push_back({"logistic proximal", jp, {Surrogate::proximal(0.5)}, zj});

  const auto ex2 = build_pathology("ex2_l1_nonregular");
  cases.push_back({"ex2 proximal", ex2.problem, {Surrogate::proximal(1.0)}, ex2.start});

  Checks out;
  for (const auto& c : cases) {
    const auto rep = validate_assumption_a(c.surrogates, c.problem, c.z, 10000, 7);
    out.push_back({c.name + " passes A1-A3 on 1e4 samples", rep.passed() && rep.a2_min_slack >= -1e-9,
                   "A1 gap " + num(rep.a1_max_abs_gap) + ", A2 slack " + num(rep.a2_min_slack) + ", A3 gap " +
                       num(rep.a3_max_deriv_gap)});
  }

  Problem sq = make_problem("square", {1});
  sq.smooth = [](const BlockVector& x) { return x.flat()[0] * x.flat()[0]; };
  sq.gradient = [](const BlockVector& x, Index) -> VectorXd { return 2.0 * x.block(0); };
  const auto lin = validate_assumption_a(Surrogate::linear(), sq, BlockVector({1}), 10000, 7);
  out.push_back({"linear bound on x^2 reports an A2 violation with slack <= -0.9",
                 !lin.a2_pass && lin.a2_min_slack <= -0.9,
                 "slack " + num(lin.a2_min_slack) + " at x = " +
                     (lin.worst_a2_point ? num((*lin.worst_a2_point)[0]) : std::string("?"))});
  return out;
}

// ---- 8: NMF ----

Checks criterion_08() {
  Checks out;
  std::mt19937_64 rng(808);
  const MatrixXd V = gaussian(20, 15, rng).cwiseAbs();
  int good = 0;
  std::string detail;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    NmfOptions o;
    o.seed = seed;
    double min_entry = INFINITY;
    o.engine.observer = [&](std::size_t, const BlockVector& x) { min_entry = std::min(min_entry, x.flat().minCoeff()); };
    // Engine iterations are single block updates; 1000 of them are 500 (W, H) sweeps.
    const auto res = nmf_factorize(V, 3, iters(1000), o);
    const auto mono = verify_monotone_descent(res.trace, 1e-12);
    if (mono.passed && min_entry >= 0.0) ++good;
    if (!mono.passed) detail += " seed " + std::to_string(seed) + " uptick at " + std::to_string(*mono.first_violation);
  }
  out.push_back({"20x15, K=3, 500 iterations, 10 seeds: monotone (1e-12) and nonnegative", good == 10,
                 std::to_string(good) + "/10" + detail});

  const MatrixXd W = gaussian(6, 3, rng).cwiseAbs().array() + 0.1;
  const MatrixXd H = gaussian(3, 5, rng).cwiseAbs().array() + 0.1;
  NmfOptions fo;
  fo.init = NmfFactors{W, H};
  const auto fp = nmf_factorize(W * H, 3, iters(20), fo);
  const double dev = std::max((fp.factors.W - W).cwiseAbs().maxCoeff(), (fp.factors.H - H).cwiseAbs().maxCoeff());
  out.push_back({"exact factorization is a fixed point", dev <= 1e-12, "max change " + num(dev)});

  const VectorXd w = gaussian(6, 1, rng).col(0).cwiseAbs().array() + 0.1;
  const VectorXd h = gaussian(4, 1, rng).col(0).cwiseAbs().array() + 0.1;
  fo.init = NmfFactors{w, h.transpose()};
  const auto r1 = nmf_factorize(w * h.transpose(), 1, iters(20), fo);
  const double obj = nmf_objective(w * h.transpose(), r1.factors);
  const double dev1 = std::max((r1.factors.W - w).cwiseAbs().maxCoeff(), (r1.factors.H.transpose() - h).cwiseAbs().maxCoeff());
  out.push_back({"rank-1 identity: factors unchanged, objective 0", dev1 <= 1e-12 && obj <= 1e-24,
                 "max change " + num(dev1) + ", objective " + num(obj)});
  return out;
}

// ---- 9: EM ----

Checks criterion_09() {
  Checks out;
  const MatrixXd alpha_c = MatrixXd::Constant(6, 3, 0.7);
  VectorXd rho(3);
  rho << 0.2, 0.5, 0.3;
  const double fp = (em_update(alpha_c, rho) - rho).cwiseAbs().maxCoeff();
  out.push_back({"constant alpha leaves rho fixed", fp <= 1e-15, "max change " + num(fp)});

  MatrixXd one(1, 2);
  one << 1.0, 0.0;
  const VectorXd r1 = em_update(one, VectorXd::Constant(2, 0.5));
  out.push_back({"N=1 with alpha row (1,0) yields (1,0) in one step", r1[0] == 1.0 && r1[1] == 0.0,
                 num(r1[0]) + ", " + num(r1[1])});

  std::mt19937_64 rng(909);
  std::bernoulli_distribution first(0.35);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  MatrixXd alpha(500, 2);
  for (Index n = 0; n < alpha.rows(); ++n) {
    const bool a = first(rng);
    alpha(n, 0) = a ? 0.8 + 0.2 * u(rng) : 0.05 * u(rng);
    alpha(n, 1) = a ? 0.05 * u(rng) : 0.8 + 0.2 * u(rng);
  }
  double best = -INFINITY, arg = 0.0;
  for (int k = 0; k <= 10000; ++k) {
    const double p = k / 10000.0;
    VectorXd q(2);
    q << p, 1 - p;
    const double ll = -em_negative_log_likelihood(alpha, q);
    if (ll > best) {
      best = ll;
      arg = p;
    }
  }
  EmOptions o;
  double simplex = 0.0;
  o.observer = [&](std::size_t, const VectorXd& r) {
    simplex = std::max({simplex, std::abs(r.sum() - 1.0), std::max(0.0, -r.minCoeff())});
  };
  const auto res = em_abundance(alpha, VectorXd::Constant(2, 0.5), iters(1000), o);
  const double err = std::abs(res.model.rho[0] - arg);
  out.push_back({"M=2 instance matches the 1e4-point grid maximizer within 1e-3", err <= 1e-3,
                 "EM " + num(res.model.rho[0]) + ", grid " + num(arg)});
  out.push_back({"simplex preserved to 1e-12 at every iterate", simplex <= 1e-12, "worst " + num(simplex)});
  out.push_back({"negative log-likelihood monotone", verify_monotone_descent(res.trace, 1e-12).passed, ""});
  return out;
}

// ---- 10: IRLS ----

Checks criterion_10() {
  Checks out;
  std::mt19937_64 rng(1010);
  const MatrixXd A = gaussian(40, 8, rng);
  const VectorXd b = gaussian(40, 1, rng).col(0);
  const auto terms = l1_row_terms(A, b);
  IrlsOptions o;
  o.eta = 1e-4;
  double tight = 0.0;
  o.observer = [&](std::size_t, const VectorXd& x) {
    tight = std::max(tight, std::abs(irls_bound(terms, o.eta, x, x) - irls_smoothed(terms, o.eta, x)));
  };
  StopCriteria stop;
  stop.max_iters = 5000;
  stop.stationarity_tol = 1e-10;
  stop.objective_rel_change_tol = 0.0;
  const auto res = irls_solve(terms, stop, o);
  out.push_back({"u(x^r, x^r) = g(x^r) to 1e-12 along the run", tight <= 1e-12, "worst " + num(tight)});
  out.push_back({"smoothed objective monotone", verify_monotone_descent(res.trace, 1e-12).passed,
                 std::to_string(res.trace.records.size() - 1) + " iterations"});

  const MatrixXd C = gaussian(30, 10, rng);
  const VectorXd d = gaussian(30, 1, rng).col(0);
  const double lambda = 0.4 * (C.transpose() * d).cwiseAbs().maxCoeff();
  StopCriteria ref_stop;
  ref_stop.max_iters = 1000000;
  ref_stop.stationarity_tol = 1e-13;
  ref_stop.objective_rel_change_tol = 0.0;
  const auto ref = lasso_bcpg(C, d, lambda, {5, 5}, SelectionRule::cyclic(2), ref_stop);
  IrlsOptions lo;
  lo.eta = 1e-6;
  lo.quadratic = QuadraticTerm{C, d};
  StopCriteria istop;
  istop.max_iters = 200000;
  istop.stationarity_tol = 1e-12;
  istop.objective_rel_change_tol = 0.0;
  const auto ir = irls_solve(l1_row_terms(lambda * MatrixXd::Identity(10, 10), VectorXd::Zero(10)), istop, lo);
  const double dist = (ir.x - ref.x).norm();
  out.push_back({"l1-reformulated instance within 10 eta of the BCPG reference", dist <= 10 * lo.eta,
                 "distance " + num(dist) + ", eta " + num(lo.eta) + ", zeros in reference " +
                     std::to_string((ref.x.array() == 0.0).count())});
  return out;
}

// ---- 11: CP ----

Checks criterion_11() {
  Checks out;
  std::mt19937_64 rng(1111);
  const MatrixXd a = gaussian(6, 1, rng), b = gaussian(5, 1, rng), c = gaussian(4, 1, rng);
  CpOptions o;
  o.init = CpFactors{a + 0.05 * gaussian(6, 1, rng), b + 0.05 * gaussian(5, 1, rng), c + 0.05 * gaussian(4, 1, rng), 0.0};
  StopCriteria stop;
  stop.max_iters = 500;
  stop.stationarity_tol = 1e-12;
  stop.objective_rel_change_tol = 0.0;
  const auto res = cp_decompose(tensor_from_factors(a, b, c), 1, stop, o);
  out.push_back({"exact rank-1 recovery fit >= 1 - 1e-8", res.factors.fit >= 1.0 - 1e-8, "fit " + num(res.factors.fit)});
  append(out, run_experiment("cp_swamp", 0));
  return out;
}

// ---- 12: WMMSE ----

Checks criterion_12() {
  Checks out;
  append(out, run_experiment("wmmse_smoke", 0));
  const auto rnd = random_channel(3, 2, 2, 1212);
  InterferenceChannel ch = rnd;
  for (Index k = 0; k < 3; ++k)
    for (Index j = 0; j < 3; ++j)
      if (k != j) ch.H[static_cast<std::size_t>(k * 3 + j)].setZero();
  VectorXd P(3);
  P << 1.0, 2.0, 0.5;
  WmmseOptions o;
  o.rate_tol = 1e-13;
  const auto res = wmmse_design(ch, P, 0.5, iters(5000), o);
  double worst = 0.0;
  for (Index k = 0; k < 3; ++k) {
    const double smax = Eigen::JacobiSVD<MatrixXcd>(ch.at(k, k)).singularValues()[0];
    worst = std::max(worst, std::abs(res.beamformers.rates[k] - std::log1p(P[k] * smax * smax / 0.5)));
  }
  out.push_back({"decoupled K=3 matches single-user rates to 1e-6", worst <= 1e-6, "worst error " + num(worst)});
  return out;
}

// ---- 13: SSUM ----

Checks criterion_13() {
  Checks out;
  append(out, run_experiment("ssum_ls", 0));

  std::mt19937_64 rng(1313);
  const MatrixXd A = gaussian(25, 4, rng);
  const VectorXd b = gaussian(25, 1, rng).col(0);
  double worst = 0.0;
  for (SurrogateKind fam : {SurrogateKind::quadratic, SurrogateKind::proximal}) {
    std::vector<QuadraticModel> stored;
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
      const double inv = 1.0 / static_cast<double>(r);
      worst = std::max({worst, (Q * inv - avg.Q).cwiseAbs().maxCoeff(), (q * inv - avg.q).cwiseAbs().maxCoeff(),
                        std::abs(c * inv - avg.c)});
    };
    run_ssum(least_squares_stream(A, b, fam, 0.5, 3), {FeasibleSet::unconstrained(4)}, iters(100), std::nullopt, o);
  }
  out.push_back({"aggregate equals the stored average to 1e-10 for r <= 100", worst <= 1e-10, "worst " + num(worst)});

  // Same realization every draw: the anchor-free quadratic model of a box QP.
  const MatrixXd G = gaussian(3, 3, rng);
  const MatrixXd H = G * G.transpose() + MatrixXd::Identity(3, 3);
  const VectorXd g = gaussian(3, 1, rng).col(0);
  StochasticStream s;
  s.family = SurrogateKind::quadratic;
  s.dims = {3};
  s.draw = [H, g](const VectorXd&, std::mt19937_64&) { return QuadraticModel{H, g, 0.0}; };
  const FeasibleSet box = FeasibleSet::box(3, -0.2, 0.2);
  const auto ss = run_ssum(s, {box}, iters(20));
  Problem p = make_problem("box qp", {3});
  p.sets = {box};
  p.smooth = [H, g](const BlockVector& x) { return 0.5 * x.flat().dot(H * x.flat()) + g.dot(x.flat()); };
  p.gradient = [H, g](const BlockVector& x, Index) -> VectorXd { return H * x.flat() + g; };
  Surrogate model = Surrogate::quadratic_matrix(H);
  model.budget = InnerSolverBudget{100000, 1e-13};
  const auto mm = run_bsum(p, {model}, SelectionRule::cyclic(1), iters(20));
  double diff = ss.trace.records.size() + 1 == mm.trace.records.size() ? 0.0 : INFINITY;
  for (std::size_t k = 0; k < ss.trace.records.size() && std::isfinite(diff); ++k) {
    diff = std::max(diff, std::abs(ss.trace.records[k].f - mm.trace.records[k + 1].f));
  }
  diff = std::max(diff, (ss.x.flat() - mm.x.flat()).norm());
  out.push_back({"degenerate stream reproduces MM", diff <= 1e-9, "max difference " + num(diff)});
  return out;
}

// ---- 14: determinism ----

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Checks criterion_14() {
  Checks out;
  const fs::path root = fs::temp_directory_path() / "bsumkit_acceptance_c14";
  fs::remove_all(root);
  for (const auto& name : experiment_names()) {
    const auto a = write_report_traces(run_experiment(name, 0), root / "a" / name);
    const auto b = write_report_traces(run_experiment(name, 0), root / "b" / name);
    bool same = a.size() == b.size() && !a.empty();
    std::string first_diff;
    for (std::size_t k = 0; same && k < a.size(); ++k) {
      if (a[k].filename() != b[k].filename() || slurp(a[k]) != slurp(b[k])) {
        same = false;
        first_diff = a[k].filename().string();
      }
    }
    out.push_back({name + " traces byte-identical across runs", same,
                   std::to_string(a.size()) + " files" + (first_diff.empty() ? "" : ", differs at " + first_diff)});
  }
  fs::remove_all(root);
  return out;
}

struct Criterion {
  int id;
  std::string title;
  double limit_seconds;
  std::function<Checks()> run;
};

std::vector<Criterion> criteria() {
  return {
      {1, "ex2 coordinatewise minimum that is not stationary", 1.0,
       [] { return pathology_experiment("ex2_l1_nonregular").checks; }},
      {2, "ex4 coupled problem: BSUM stuck, BSUMM solves", 5.0,
       [] { return pathology_experiment("ex4_coupling").checks; }},
      {3, "ex5 linear bound oscillates, proximal converges", 1.0,
       [] { return pathology_experiment("ex5_linear_bound").checks; }},
      {4, "ex6 Powell cycle and its rescues", 30.0, [] { return pathology_experiment("ex6_powell", 0).checks; }},
      {5, "PSCA naive oscillation, damped convergence, unit-step identity", 5.0,
       [] { return run_experiment("psca_naive_vs_damped", 0).checks; }},
      {6, "surrogate validator", 30.0, criterion_06},
      {7, "LASSO BCPG selection rules", 120.0, [] { return run_experiment("lasso_rules", 0).checks; }},
      {8, "NMF multiplicative updates", 10.0, criterion_08},
      {9, "EM abundance estimation", 10.0, criterion_09},
      {10, "IRLS", 30.0, criterion_10},
      {11, "CP decomposition", 300.0, criterion_11},
      {12, "WMMSE beamforming", 30.0, criterion_12},
      {13, "SSUM", 30.0, criterion_13},
      {14, "determinism of reproduce scenarios", 600.0, criterion_14},
  };
}

}  // namespace

int main(int argc, char** argv) {
  std::vector<int> wanted;
  for (int k = 1; k < argc; ++k) wanted.push_back(std::atoi(argv[k]));
  bool all_pass = true;
  for (const auto& c : criteria()) {
    if (!wanted.empty() && std::find(wanted.begin(), wanted.end(), c.id) == wanted.end()) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Checks checks;
    std::string error;
    try {
      checks = c.run();
    } catch (const std::exception& e) {
      error = e.what();
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    bool pass = error.empty() && !checks.empty() && secs < c.limit_seconds;
    for (const auto& ch : checks) pass = pass && ch.passed;
    all_pass = all_pass && pass;
    std::printf("C%02d %s  %s  (%.2f s, limit %.0f s)\n", c.id, pass ? "PASS" : "FAIL", c.title.c_str(), secs,
                c.limit_seconds);
    for (const auto& ch : checks) {
      std::printf("      [%s] %s%s%s\n", ch.passed ? "ok" : "FAIL", ch.name.c_str(), ch.detail.empty() ? "" : ": ",
                  ch.detail.c_str());
    }
    if (!error.empty()) std::printf("      error: %s\n", error.c_str());
    std::fflush(stdout);
  }
  return all_pass ? 0 : 1;
}
