#include "bsumkit/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <random>

#include "bsumkit/diagnostics.hpp"
#include "bsumkit/engine.hpp"
#include "bsumkit/errors.hpp"
#include "bsumkit/pathology.hpp"
#include "bsumkit/solvers/cp.hpp"
#include "bsumkit/solvers/lasso.hpp"
#include "bsumkit/solvers/wmmse.hpp"

namespace bsum {

namespace {

std::string num(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

StopCriteria fixed_iters(std::size_t n) {
  StopCriteria s;
  s.max_iters = n;
  s.objective_rel_change_tol = 0.0;
  s.stationarity_tol = 0.0;
  return s;
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

double max_distance_to(const std::vector<BlockVector>& xs, const VectorXd& p) {
  double worst = 0.0;
  for (const auto& x : xs) worst = std::max(worst, (x.flat() - p).norm());
  return worst;
}

// Iterates of a driver run, collected through the observer.
struct Recorder {
  std::vector<BlockVector> xs;
  EngineOptions options() {
    EngineOptions o;
    o.observer = [this](std::size_t, const BlockVector& x) { xs.push_back(x); };
    return o;
  }
};

// ---- pathologies ----

void ex2(ExperimentReport& rep) {
  const auto fx = build_pathology("ex2_l1_nonregular");
  GapOptions go;
  go.probe_directions.push_back((VectorXd(2) << 4.0, -3.0).finished() / 5.0);
  const GapReport gap = stationarity_gap(fx.problem, fx.start, go);
  rep.checks.push_back({"ex2 coordinatewise gap <= 1e-8", gap.coordinatewise_gap <= 1e-8,
                        num(gap.coordinatewise_gap)});
  rep.checks.push_back({"ex2 full gap >= 0.9", gap.full_gap >= 0.9, num(gap.full_gap)});
  Recorder rec;
  auto run = run_bsum(fx.problem, {Surrogate::exact()}, SelectionRule::cyclic(2), fixed_iters(100),
                      fx.start, rec.options());
  const double moved = max_distance_to(rec.xs, fx.start.flat());
  rep.checks.push_back({"ex2 exact BCD makes no progress in 100 iterations",
                        moved == 0.0 && run.trace.records.size() == 101, "max move " + num(moved)});
  rep.traces.emplace_back("pathologies_ex2_bcd", std::move(run.trace));
}

void ex4(ExperimentReport& rep) {
  const auto fx = build_pathology("ex4_coupling");
  const Problem slice = coupled_slice_view(fx.problem);
  Recorder rec;
  auto run = run_bsum(slice, {Surrogate::exact()}, SelectionRule::cyclic(2), fixed_iters(100), fx.start,
                      rec.options());
  const double moved = max_distance_to(rec.xs, fx.start.flat());
  const double f = run.trace.records.back().f;
  rep.checks.push_back({"ex4 BSUM stays at (0,2) with f = 4",
                        moved == 0.0 && f == 4.0 && run.trace.records.size() == 101,
                        "f " + num(f) + ", max move " + num(moved)});
  rep.traces.emplace_back("pathologies_ex4_bsum", std::move(run.trace));

  StopCriteria stop;
  stop.max_iters = 10000;
  stop.objective_rel_change_tol = 1e-12;
  stop.stationarity_tol = 1e-9;
  auto mm = run_bsumm(fx.problem, {Surrogate::proximal(1.0)}, 1.0, SelectionRule::cyclic(2), stop, fx.start);
  const double fm = eval_objective(fx.problem, mm.x);
  const double res = coupling_residual(*fx.problem.coupling, mm.x);
  rep.checks.push_back({"ex4 BSUMM reaches f = 2 +- 1e-6, residual <= 1e-6",
                        std::abs(fm - 2.0) <= 1e-6 && res <= 1e-6 && mm.trace.records.size() <= 10001,
                        "f " + num(fm) + ", residual " + num(res) + ", iterations " +
                            std::to_string(mm.trace.records.size() - 1)});
  rep.traces.emplace_back("pathologies_ex4_bsumm", std::move(mm.trace));
}

void ex5(ExperimentReport& rep) {
  const auto fx = build_pathology("ex5_linear_bound");
  Recorder rec;
  EngineOptions opts = rec.options();
  opts.detect_cycles = false;
  auto lin = run_bsum(fx.problem, {Surrogate::linear()}, SelectionRule::all_blocks(2), fixed_iters(100),
                      fx.start, opts);
  bool corners = true;
  for (const auto& x : rec.xs) {
    for (Index k = 0; k < 2; ++k) corners = corners && std::abs(x.flat()[k]) == 1.0;
  }
  double fmin = INFINITY;
  for (const auto& r : lin.trace.records) fmin = std::min(fmin, r.f);
  rep.checks.push_back({"ex5 linear surrogate stays in {-1,1}^2 with f >= 0.5", corners && fmin >= 0.5,
                        "min f " + num(fmin)});
  rep.traces.emplace_back("pathologies_ex5_linear", std::move(lin.trace));

  StopCriteria stop;
  stop.max_iters = 1000;
  stop.objective_rel_change_tol = 0.0;
  stop.stationarity_tol = 1e-12;
  auto prox = run_bsum(fx.problem, {Surrogate::proximal(1.0)}, SelectionRule::all_blocks(2), stop, fx.start);
  const double f = prox.trace.records.back().f;
  rep.checks.push_back({"ex5 proximal surrogate reaches f <= 1e-8", f <= 1e-8, "f " + num(f)});
  rep.traces.emplace_back("pathologies_ex5_proximal", std::move(prox.trace));
}

void ex6(ExperimentReport& rep, std::uint64_t seed) {
  const auto fx = build_pathology("ex6_powell");
  StopCriteria stop;
  stop.max_iters = 10000;
  auto cyc = run_bsum(fx.problem, {Surrogate::exact()}, SelectionRule::cyclic(3), stop, fx.start);
  bool all_patterns = cyc.trace.status == TerminalStatus::detected_cycle;
  double worst = 0.0;
  for (const auto& p : fx.expected.points) {
    double best = INFINITY;
    for (const auto& c : cyc.trace.cycle) best = std::min(best, (c - p).norm());
    worst = std::max(worst, best);
  }
  all_patterns = all_patterns && worst <= 0.1;
  rep.checks.push_back({"ex6 exact cyclic BSUM detects the six-point cycle", all_patterns,
                        to_string(cyc.trace.status) + ", cycle length " + std::to_string(cyc.trace.cycle.size()) +
                            ", worst pattern distance " + num(worst)});
  rep.traces.emplace_back("pathologies_ex6_exact", std::move(cyc.trace));

  StopCriteria pstop;
  pstop.max_iters = 1000;
  pstop.objective_rel_change_tol = 0.0;
  pstop.stationarity_tol = 1e-6;
  auto prox = run_bsum(fx.problem, {Surrogate::proximal(1.0)}, SelectionRule::cyclic(3), pstop, fx.start);
  const double gap = stationarity_gap(fx.problem, prox.x).full_gap;
  rep.checks.push_back({"ex6 proximal BSUM reaches gap <= 1e-6 within 1000 iterations", gap <= 1e-6,
                        "gap " + num(gap) + ", f " + num(prox.trace.records.back().f) + ", " +
                            to_string(prox.trace.status)});
  rep.traces.emplace_back("pathologies_ex6_proximal", std::move(prox.trace));

  int ok = 0;
  StopCriteria rstop;
  rstop.max_iters = 10000;
  rstop.objective_rel_change_tol = 0.0;
  rstop.stationarity_tol = 1e-4;
  for (std::uint64_t s = 0; s < 50; ++s) {
    auto run = run_bsum(fx.problem, {Surrogate::exact()}, SelectionRule::randomized(3, seed + s), rstop, fx.start);
    if (stationarity_gap(fx.problem, run.x).full_gap <= 1e-4) ++ok;
  }
  rep.checks.push_back({"ex6 randomized exact BSUM reaches gap <= 1e-4 on >= 45/50 seeds", ok >= 45,
                        std::to_string(ok) + "/50"});
}

ExperimentReport pathologies(std::uint64_t seed) {
  ExperimentReport rep;
  rep.name = "pathologies";
  ex2(rep);
  ex4(rep);
  ex5(rep);
  ex6(rep, seed);
  return rep;
}

// ---- PSCA ----

ExperimentReport psca_naive_vs_damped(std::uint64_t seed) {
  ExperimentReport rep;
  rep.name = "psca_naive_vs_damped";
  const auto fx = build_pathology("naive_parallel");
  StopCriteria stop;
  stop.max_iters = 1000;
  auto naive = run_psca(fx.problem, {Surrogate::exact()}, StepsizeSchedule::constant(1.0),
                        SelectionRule::all_blocks(2), stop, fx.start);
  const bool osc = naive.trace.status == TerminalStatus::detected_cycle && naive.trace.cycle.size() == 2;
  rep.checks.push_back({"naive gamma = 1 all-block update flagged as period-2 oscillation", osc,
                        to_string(naive.trace.status) + ", period " + std::to_string(naive.trace.cycle.size())});
  rep.traces.emplace_back("psca_naive", std::move(naive.trace));

  StopCriteria dstop;
  dstop.max_iters = 1000;
  dstop.objective_rel_change_tol = 0.0;
  dstop.stationarity_tol = 0.0;
  auto damped = run_psca(fx.problem, {Surrogate::exact()}, StepsizeSchedule::diminishing(1.0, 1.0, 2.0),
                         SelectionRule::all_blocks(2), dstop, fx.start);
  std::size_t hit = 0;
  for (const auto& r : damped.trace.records) {
    if (r.f <= 1e-6) {
      hit = r.r;
      break;
    }
  }
  rep.checks.push_back({"damped gamma^r = 1/(r+2) reaches f <= 1e-6 within 1000 iterations", hit > 0,
                        hit ? "at r = " + std::to_string(hit) : "final f " + num(damped.trace.records.back().f)});
  rep.traces.emplace_back("psca_damped", std::move(damped.trace));

  // Single-block PSCA with gamma = 1 is plain BSUM.
  const auto inst = make_lasso_instance(30, 12, seed);
  const auto sizes = even_partition(12, 3);
  const Problem p = make_lasso_problem(inst.A, inst.b, inst.lambda, sizes);
  std::vector<Surrogate> surr;
  for (double L : lasso_block_lipschitz(inst.A, sizes)) surr.push_back(Surrogate::quadratic(L));
  const auto a = run_bsum(p, surr, SelectionRule::cyclic(3), fixed_iters(200));
  const auto b = run_psca(p, surr, StepsizeSchedule::constant(1.0), SelectionRule::cyclic(3), fixed_iters(200));
  double diff = a.trace.records.size() == b.trace.records.size() ? 0.0 : INFINITY;
  for (std::size_t k = 0; k < std::min(a.trace.records.size(), b.trace.records.size()); ++k) {
    const auto& ra = a.trace.records[k];
    const auto& rb = b.trace.records[k];
    diff = std::max({diff, std::abs(ra.f - rb.f), std::abs(ra.step_norm - rb.step_norm)});
    if (ra.blocks != rb.blocks) diff = INFINITY;
  }
  rep.checks.push_back({"gamma = 1 single-block PSCA trace equals BSUM to 1e-12", diff <= 1e-12,
                        "max difference " + num(diff)});
  return rep;
}

// ---- BSUMM on the coupled example ----

ExperimentReport bsumm_ex4(std::uint64_t) {
  ExperimentReport rep;
  rep.name = "bsumm_ex4";
  const auto fx = build_pathology("ex4_coupling");
  StopCriteria stop;
  stop.max_iters = 10000;
  stop.objective_rel_change_tol = 1e-12;
  stop.stationarity_tol = 1e-9;
  auto mm = run_bsumm(fx.problem, {Surrogate::proximal(1.0)}, 1.0, SelectionRule::cyclic(2), stop, fx.start);
  const double f = eval_objective(fx.problem, mm.x);
  const double res = coupling_residual(*fx.problem.coupling, mm.x);
  rep.table.push_back("final objective " + num(f) + ", residual " + num(res) + ", iterations " +
                      std::to_string(mm.trace.records.size() - 1));
  rep.checks.push_back({"final objective 2 +- 1e-6", std::abs(f - 2.0) <= 1e-6, num(f)});
  rep.checks.push_back({"coupling residual <= 1e-6", res <= 1e-6, num(res)});
  rep.traces.emplace_back("bsumm_ex4", std::move(mm.trace));
  return rep;
}

// ---- SSUM ----

ExperimentReport ssum_ls(std::uint64_t seed) {
  ExperimentReport rep;
  rep.name = "ssum_ls";
  std::mt19937_64 rng(seed + 17);
  std::normal_distribution<double> g(0.0, 1.0);
  const Index n = 40, d = 5;
  MatrixXd A(n, d);
  for (Index k = 0; k < A.size(); ++k) A.data()[k] = g(rng);
  VectorXd xt(d);
  for (Index k = 0; k < d; ++k) xt[k] = g(rng);
  VectorXd b = A * xt;
  for (Index k = 0; k < n; ++k) b[k] += 1e-3 * g(rng);
  const VectorXd xstar = (A.transpose() * A).ldlt().solve(A.transpose() * b);
  const auto stream = least_squares_stream(A, b, SurrogateKind::proximal, 0.1, seed);
  auto run = run_ssum(stream, {FeasibleSet::unconstrained(d)}, fixed_iters(10000));
  const double err = (run.x.flat() - xstar).norm();
  rep.checks.push_back({"SSUM within 1e-3 of the pool normal-equations solution after 1e4 draws",
                        err <= 1e-3, "error " + num(err)});
  rep.traces.emplace_back("ssum_ls", std::move(run.trace));
  return rep;
}

// ---- WMMSE ----

ExperimentReport wmmse_smoke(std::uint64_t seed) {
  ExperimentReport rep;
  rep.name = "wmmse_smoke";
  {
    InterferenceChannel ch{1, 1, 1, {MatrixXcd::Constant(1, 1, std::complex<double>(0.8, -0.6))}};
    StopCriteria stop;
    stop.max_iters = 200;
    WmmseOptions o;
    o.rate_tol = 1e-14;
    const auto res = wmmse_design(ch, VectorXd::Constant(1, 2.0), 0.5, stop, o);
    const double expect = std::log1p(2.0 * 1.0 / 0.5);
    const double err = std::abs(res.beamformers.rates[0] - expect);
    rep.checks.push_back({"K=1 rate matches log(1 + P|h|^2/sigma^2) to 1e-8", err <= 1e-8, "error " + num(err)});
  }
  int ok = 0;
  for (std::uint64_t s = 0; s < 20; ++s) {
    const auto ch = random_channel(3, 2, 2, seed + s);
    StopCriteria stop;
    stop.max_iters = 100;
    WmmseOptions o;
    o.seed = seed + 1000 + s;
    double worst_power = -INFINITY;
    o.observer = [&](std::size_t, const Beamformers& b) {
      worst_power = std::max(worst_power, (b.powers.array() - 1.0).maxCoeff());
    };
    auto res = wmmse_design(ch, VectorXd::Ones(3), 1.0, stop, o);
    const bool mono = verify_monotone_descent(res.trace, 1e-10).passed;
    const bool conv = res.trace.status == TerminalStatus::converged;
    const bool good = mono && conv && worst_power <= 1e-9;
    if (good) ++ok;
    rep.table.push_back("seed " + std::to_string(seed + s) + ": sum rate " + num(res.beamformers.rates.sum()) +
                        ", sweeps " + std::to_string((res.trace.records.size() - 1) / 2) +
                        (mono ? ", monotone" : ", NOT monotone") + (conv ? ", converged" : ", not converged"));
    rep.traces.emplace_back("wmmse_seed" + std::to_string(seed + s), std::move(res.trace));
  }
  rep.checks.push_back({"K=3, M=N=2: monotone, feasible, converged within 100 iterations on >= 18/20 seeds",
                        ok >= 18, std::to_string(ok) + "/20"});
  return rep;
}

// ---- LASSO rules ----

ExperimentReport lasso_rules(std::uint64_t seed) {
  ExperimentReport rep;
  rep.name = "lasso_rules";
  const auto inst = make_lasso_instance(200, 1000, seed);
  const auto sizes = even_partition(1000, 20);
  StopCriteria ref_stop;
  ref_stop.max_iters = 1000000;
  ref_stop.objective_rel_change_tol = 0.0;
  ref_stop.stationarity_tol = 1e-12;
  LassoOptions ro;
  ro.gap_interval = 200;
  const auto ref = lasso_bcpg(inst.A, inst.b, inst.lambda, sizes, SelectionRule::cyclic(20), ref_stop, ro);
  const double fstar = ref.trace.records.back().f;
  rep.table.push_back("reference f* " + num(fstar) + " after " + std::to_string(ref.trace.records.size() - 1) +
                      " iterations (" + to_string(ref.trace.status) + ")");

  StopCriteria stop;
  stop.max_iters = 200000;
  stop.objective_rel_change_tol = 0.0;
  // MBI candidate objectives tie at rounding level below about 1e-8.
  stop.stationarity_tol = 1e-7;
  const std::vector<std::pair<std::string, SelectionRule>> rules = {
      {"cyclic", SelectionRule::cyclic(20)},
      {"essentially_cyclic", SelectionRule::essentially_cyclic(20, seed)},
      {"gauss_southwell", SelectionRule::gauss_southwell(20)},
      {"mbi", SelectionRule::mbi(20)},
      {"randomized", SelectionRule::randomized(20, seed)},
  };
  for (const auto& [name, rule] : rules) {
    auto res = lasso_bcpg(inst.A, inst.b, inst.lambda, sizes, rule, stop);
    const double f = res.trace.records.back().f;
    const bool mono = verify_monotone_descent(res.trace, 1e-12).passed;
    rep.checks.push_back({name + " reaches f* + 1e-6", f <= fstar + 1e-6 && mono,
                          "f - f* " + num(f - fstar) + ", iterations " + std::to_string(res.trace.records.size() - 1) +
                              (mono ? "" : ", descent violated")});
    if (name == "cyclic") {
      const auto rate = estimate_rate_exponent(res.trace, fstar);
      rep.checks.push_back({"cyclic tail log-log slope <= -0.9", rate.exponent <= -0.9,
                            "slope " + num(rate.exponent) + " (" + to_string(rate.classification) + ")"});
    }
    rep.traces.emplace_back("lasso_" + name, std::move(res.trace));
  }
  const double lam0 = (inst.A.transpose() * inst.b).cwiseAbs().maxCoeff();
  const auto zero = lasso_bcpg(inst.A, inst.b, lam0, sizes, SelectionRule::cyclic(20), fixed_iters(100));
  rep.checks.push_back({"lambda = ||A'b||_inf returns exactly 0", zero.x.cwiseAbs().maxCoeff() == 0.0,
                        "max |x| " + num(zero.x.cwiseAbs().maxCoeff())});
  return rep;
}

// ---- CP swamp ----

ExperimentReport cp_swamp(std::uint64_t seed) {
  ExperimentReport rep;
  rep.name = "cp_swamp";
  const Index R = 5;
  const TensorData X = make_swamp_tensor(30, R, seed);
  StopCriteria stop = fixed_iters(500);
  std::vector<double> plain, prox, dimin;
  rep.table.push_back("seed  plain_als  proximal_als  diminishing_proximal");
  for (std::uint64_t s = 0; s < 20; ++s) {
    const CpFactors init = cp_default_init(30, 30, 30, R, seed + 100 + s);
    double fits[3];
    const CpMode modes[3] = {CpMode::plain_als, CpMode::proximal_als, CpMode::diminishing_proximal};
    for (int m = 0; m < 3; ++m) {
      CpOptions o;
      o.mode = modes[m];
      o.gamma = 1.0;
      o.init = init;
      o.engine.gap_interval = 0;
      o.engine.detect_cycles = false;
      auto res = cp_decompose(X, R, stop, o);
      fits[m] = res.factors.fit;
      static const char* tag[3] = {"plain", "proximal", "diminishing"};
      rep.traces.emplace_back("cp_seed" + std::to_string(seed + 100 + s) + "_" + tag[m], std::move(res.trace));
    }
    plain.push_back(fits[0]);
    prox.push_back(fits[1]);
    dimin.push_back(fits[2]);
    char line[128];
    std::snprintf(line, sizeof line, "%4llu  %.10f  %.10f  %.10f", static_cast<unsigned long long>(seed + 100 + s),
                  fits[0], fits[1], fits[2]);
    rep.table.push_back(line);
  }
  const double mp = median(plain), mx = median(prox), md = median(dimin);
  rep.table.push_back("median  " + num(mp) + "  " + num(mx) + "  " + num(md));
  rep.checks.push_back({"median fit proximal ALS >= plain ALS", mx >= mp, num(mx) + " vs " + num(mp)});
  rep.checks.push_back({"median fit diminishing proximal >= plain ALS", md >= mp, num(md) + " vs " + num(mp)});
  return rep;
}

}  // namespace

bool ExperimentReport::passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const ExperimentCheck& c) { return c.passed; });
}

ExperimentReport pathology_experiment(std::string_view fixture, std::uint64_t seed) {
  ExperimentReport rep;
  rep.name = "pathologies_" + std::string(fixture);
  if (fixture == "ex2_l1_nonregular") {
    ex2(rep);
  } else if (fixture == "ex4_coupling") {
    ex4(rep);
  } else if (fixture == "ex5_linear_bound") {
    ex5(rep);
  } else if (fixture == "ex6_powell") {
    ex6(rep, seed);
  } else {
    throw PreconditionError("no pathology experiment for '" + std::string(fixture) + "'");
  }
  return rep;
}

const std::vector<std::string>& experiment_names() {
  static const std::vector<std::string> names = {"pathologies", "cp_swamp",  "lasso_rules",
                                                 "wmmse_smoke", "bsumm_ex4", "ssum_ls",
                                                 "psca_naive_vs_damped"};
  return names;
}

ExperimentReport run_experiment(std::string_view name, std::uint64_t seed) {
  if (name == "pathologies") return pathologies(seed);
  if (name == "cp_swamp") return cp_swamp(seed);
  if (name == "lasso_rules") return lasso_rules(seed);
  if (name == "wmmse_smoke") return wmmse_smoke(seed);
  if (name == "bsumm_ex4") return bsumm_ex4(seed);
  if (name == "ssum_ls") return ssum_ls(seed);
  if (name == "psca_naive_vs_damped") return psca_naive_vs_damped(seed);
  std::string valid;
  for (const auto& n : experiment_names()) valid += (valid.empty() ? "" : ", ") + n;
  throw PreconditionError("unknown experiment '" + std::string(name) + "'; valid: " + valid);
}

void print_report(const ExperimentReport& report, std::ostream& out) {
  out << "== " << report.name << " ==\n";
  for (const auto& line : report.table) out << line << "\n";
  for (const auto& c : report.checks) {
    out << (c.passed ? "PASS  " : "FAIL  ") << c.name;
    if (!c.detail.empty()) out << "  [" << c.detail << "]";
    out << "\n";
  }
  out << (report.passed() ? "result: pass" : "result: FAIL") << "\n";
}

std::vector<std::filesystem::path> write_report_traces(const ExperimentReport& report,
                                                       const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  std::vector<std::filesystem::path> paths;
  for (const auto& [name, trace] : report.traces) {
    const auto path = dir / (name + ".csv");
    std::ofstream f(path, std::ios::binary);
    if (!f) throw Error("cannot write " + path.string());
    trace.write_csv(f);
    paths.push_back(path);
  }
  return paths;
}

LassoInstance make_lasso_instance(Index rows, Index cols, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, 1.0);
  LassoInstance inst;
  inst.A.resize(rows, cols);
  for (Index k = 0; k < inst.A.size(); ++k) inst.A.data()[k] = g(rng) / std::sqrt(static_cast<double>(rows));
  VectorXd x0 = VectorXd::Zero(cols);
  const Index nnz = std::max<Index>(1, cols / 20);
  for (Index k = 0; k < nnz; ++k) x0[(k * 7919) % cols] = g(rng);
  inst.b = inst.A * x0;
  for (Index k = 0; k < rows; ++k) inst.b[k] += 0.01 * g(rng);
  inst.lambda = 0.1 * (inst.A.transpose() * inst.b).cwiseAbs().maxCoeff();
  return inst;
}

TensorData make_swamp_tensor(Index dim, Index R, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, 1.0);
  // Columns share a common direction: pairwise correlation about 0.9.
  auto factor = [&]() {
    MatrixXd F(dim, R);
    VectorXd common(dim);
    for (Index k = 0; k < dim; ++k) common[k] = g(rng);
    for (Index r = 0; r < R; ++r) {
      for (Index k = 0; k < dim; ++k) F(k, r) = 3.0 * common[k] + g(rng);
    }
    return F;
  };
  const MatrixXd A = factor();
  const MatrixXd B = factor();
  const MatrixXd C = factor();
  TensorData X = tensor_from_factors(A, B, C);
  // Unit Frobenius norm, so the proximal coefficient is relative to the data.
  X.unfolding /= X.unfolding.norm();
  return X;
}

}  // namespace bsum
