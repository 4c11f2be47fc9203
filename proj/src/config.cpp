#include "bsumkit/config.hpp"

#include <cstdlib>
#include <fstream>
#include <ostream>
#include <sstream>

#include <json.hpp>

#include "bsumkit/errors.hpp"
#include "bsumkit/experiments.hpp"
#include "bsumkit/matrix_market.hpp"
#include "bsumkit/pathology.hpp"
#include "bsumkit/solvers/cp.hpp"
#include "bsumkit/solvers/em.hpp"
#include "bsumkit/solvers/irls.hpp"
#include "bsumkit/solvers/lasso.hpp"
#include "bsumkit/solvers/nmf.hpp"
#include "bsumkit/solvers/wmmse.hpp"

namespace bsum {

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

// A JSON object plus its path from the document root, for error messages.
class Node {
 public:
  Node(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError(path_ + ": expected an object");
  }

  void allow(std::initializer_list<const char*> keys) const { allow(std::vector<const char*>(keys)); }
  void allow(const std::vector<const char*>& keys) const {
    for (auto it = j_.begin(); it != j_.end(); ++it) {
      bool known = false;
      for (const char* k : keys) known = known || it.key() == k;
      if (!known) {
        std::string valid;
        for (const char* k : keys) valid += (valid.empty() ? "" : ", ") + std::string(k);
        throw ConfigError(path_ + "." + it.key() + ": unknown key (allowed: " + (valid.empty() ? "none" : valid) + ")");
      }
    }
  }
  bool has(const char* key) const { return j_.contains(key); }
  std::string at(const char* key) const { return path_ + "." + key; }

  double number(const char* key, std::optional<double> fallback = std::nullopt) const {
    if (!has(key)) {
      if (fallback) return *fallback;
      throw ConfigError(at(key) + ": required number is missing");
    }
    const json& v = j_.at(key);
    if (!v.is_number()) throw ConfigError(at(key) + ": expected a number");
    return v.get<double>();
  }
  std::int64_t integer(const char* key, std::optional<std::int64_t> fallback = std::nullopt) const {
    if (!has(key)) {
      if (fallback) return *fallback;
      throw ConfigError(at(key) + ": required integer is missing");
    }
    const json& v = j_.at(key);
    if (!v.is_number_integer()) throw ConfigError(at(key) + ": expected an integer");
    return v.get<std::int64_t>();
  }
  std::string text(const char* key, std::optional<std::string> fallback = std::nullopt) const {
    if (!has(key)) {
      if (fallback) return *fallback;
      throw ConfigError(at(key) + ": required string is missing");
    }
    const json& v = j_.at(key);
    if (!v.is_string()) throw ConfigError(at(key) + ": expected a string");
    return v.get<std::string>();
  }
  const json& raw(const char* key) const { return j_.at(key); }
  Node child(const char* key) const {
    static const json empty = json::object();
    return has(key) ? Node(j_.at(key), at(key)) : Node(empty, at(key));
  }

 private:
  const json& j_;
  std::string path_;
};

std::pair<std::size_t, std::size_t> line_column(const std::string& text, std::size_t byte) {
  std::size_t line = 1, col = 1;
  for (std::size_t k = 0; k < byte && k < text.size(); ++k) {
    if (text[k] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return {line, col};
}

json parse_json(const std::string& text) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    // e.byte is one past the offending character.
    const auto [line, col] = line_column(text, e.byte > 0 ? e.byte - 1 : 0);
    std::string msg = e.what();
    const auto pos = msg.find("parse error");
    throw ConfigError("line " + std::to_string(line) + ", column " + std::to_string(col) + ": " +
                      (pos == std::string::npos ? msg : msg.substr(pos)));
  }
}

struct SolverSchema {
  const char* name;
  std::vector<const char*> inputs;
  std::vector<const char*> params;
  bool has_rule;
};

const std::vector<SolverSchema>& schemas() {
  static const std::vector<SolverSchema> s = {
      {"lasso", {"A", "b"}, {"lambda", "blocks", "block_sizes"}, true},
      {"nmf", {"V"}, {"rank", "epsilon"}, false},
      {"irls", {"A", "b"}, {"eta", "lambda"}, false},
      {"cp", {"X"}, {"rank", "mode", "gamma"}, false},
      {"em", {"alpha", "rho0"}, {}, false},
      {"wmmse", {"H"}, {"K", "M", "N", "P", "sigma2"}, false},
      {"pathology", {}, {"name", "surrogate", "gamma", "epsilon"}, true},
      {"ssum_ls", {"A", "b"}, {"family", "gamma"}, false},
  };
  return s;
}

const SolverSchema& schema_for(const std::string& solver) {
  for (const auto& s : schemas()) {
    if (solver == s.name) return s;
  }
  std::string valid;
  for (const auto& n : solver_names()) valid += (valid.empty() ? "" : ", ") + n;
  throw ConfigError("$.solver: unknown solver '" + solver + "'; valid solvers: " + valid);
}

StopCriteria parse_stop(const Node& n) {
  n.allow({"max_iters", "objective_rel_change_tol", "stationarity_tol", "wall_clock_seconds"});
  StopCriteria s;
  const auto iters = n.integer("max_iters", static_cast<std::int64_t>(s.max_iters));
  if (iters < 1) throw ConfigError(n.at("max_iters") + ": must be at least 1");
  s.max_iters = static_cast<std::size_t>(iters);
  s.objective_rel_change_tol = n.number("objective_rel_change_tol", s.objective_rel_change_tol);
  s.stationarity_tol = n.number("stationarity_tol", s.stationarity_tol);
  if (n.has("wall_clock_seconds")) s.wall_clock_limit = std::chrono::duration<double>(n.number("wall_clock_seconds"));
  try {
    s.validate();
  } catch (const Error& e) {
    throw ConfigError("$.stop: " + std::string(e.what()));
  }
  return s;
}

// Paths from a config may be absolute or relative to the config's folder.
fs::path resolve(const fs::path& base, const std::string& p) {
  const fs::path path(p);
  return path.is_absolute() ? path : base / path;
}

// ---- execution helpers ----

struct Inputs {
  const RunConfig& cfg;
  json j;

  bool has(const char* key) const { return j.contains(key); }
  fs::path path(const char* key) const {
    if (!has(key)) throw ConfigError(std::string("$.inputs.") + key + ": required input is missing");
    return resolve(cfg.base_dir, j.at(key).get<std::string>());
  }
  MatrixXd matrix(const char* key) const {
    try {
      return read_matrix_market(path(key));
    } catch (const ConfigError&) {
      throw;
    } catch (const std::exception& e) {
      throw ConfigError(std::string("$.inputs.") + key + ": " + e.what());
    }
  }
  VectorXd vector(const char* key) const {
    const MatrixXd m = matrix(key);
    if (m.cols() != 1) throw ConfigError(std::string("$.inputs.") + key + ": expected a single column");
    return m.col(0);
  }
  MatrixXcd complex_matrix(const char* key) const {
    try {
      return read_matrix_market_complex(path(key));
    } catch (const std::exception& e) {
      throw ConfigError(std::string("$.inputs.") + key + ": " + e.what());
    }
  }
  TensorData tensor(const char* key) const {
    try {
      return read_tensor(path(key));
    } catch (const std::exception& e) {
      throw ConfigError(std::string("$.inputs.") + key + ": " + e.what());
    }
  }
};

SelectionRule parse_rule(const RunConfig& cfg, Index n) {
  const json j = json::parse(cfg.rule_json);
  const Node node(j, "$.rule");
  const std::string kind = node.text("kind", std::string("cyclic"));
  const auto seed = static_cast<std::uint64_t>(node.integer("seed", static_cast<std::int64_t>(cfg.seed)));
  if (kind == "cyclic") return SelectionRule::cyclic(n);
  if (kind == "essentially_cyclic") return SelectionRule::essentially_cyclic(n, seed);
  if (kind == "gauss_southwell") return SelectionRule::gauss_southwell(n, node.number("q", 1.0));
  if (kind == "mbi") return SelectionRule::mbi(n);
  if (kind == "randomized") return SelectionRule::randomized(n, seed);
  if (kind == "all_blocks") return SelectionRule::all_blocks(n);
  throw ConfigError("$.rule.kind: unknown rule '" + kind +
                    "' (cyclic, essentially_cyclic, gauss_southwell, mbi, randomized, all_blocks)");
}

Surrogate parse_surrogate(const Node& params) {
  const std::string kind = params.text("surrogate", std::string("exact"));
  if (kind == "exact") return Surrogate::exact();
  if (kind == "proximal") return Surrogate::proximal(params.number("gamma", 1.0));
  if (kind == "linear") return Surrogate::linear();
  if (kind == "quadratic_estimated") return Surrogate::quadratic_estimated();
  if (kind == "jensen") return Surrogate::jensen();
  throw ConfigError("$.params.surrogate: unknown surrogate '" + kind +
                    "' (exact, proximal, linear, quadratic_estimated, jensen)");
}

fs::path sibling(const fs::path& p, const std::string& tag) {
  fs::path out = p;
  out.replace_filename(p.stem().string() + "_" + tag + p.extension().string());
  return out;
}

void write_trace(const RunConfig& cfg, const Trace& t, RunOutcome& out) {
  if (cfg.trace_path.empty()) return;
  if (cfg.trace_path.has_parent_path()) fs::create_directories(cfg.trace_path.parent_path());
  std::ofstream f(cfg.trace_path, std::ios::binary);
  if (!f) throw Error("cannot write " + cfg.trace_path.string());
  t.write_csv(f);
  out.written.push_back(cfg.trace_path);
}

template <class M>
void write_solution(const fs::path& p, const M& m, RunOutcome& out) {
  if (p.empty()) return;
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  write_matrix_market(p, m);
  out.written.push_back(p);
}

Problem pathology_problem(const Node& params, BlockVector& start) {
  PathologyOptions po;
  po.powell_epsilon = params.number("epsilon", po.powell_epsilon);
  auto fx = build_pathology(params.text("name"), po);
  start = fx.start;
  return fx.problem;
}

}  // namespace

const std::vector<std::string>& solver_names() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> v;
    for (const auto& s : schemas()) v.push_back(s.name);
    return v;
  }();
  return names;
}

RunConfig parse_run_config(const std::string& text, const fs::path& base_dir) {
  const json doc = parse_json(text);
  const Node root(doc, "$");
  root.allow({"solver", "seed", "inputs", "params", "rule", "stop", "outputs", "validation"});
  RunConfig cfg;
  cfg.base_dir = base_dir;
  cfg.solver = root.text("solver");
  const SolverSchema& schema = schema_for(cfg.solver);
  const auto seed = root.integer("seed", 0);
  if (seed < 0) throw ConfigError("$.seed: must be nonnegative");
  cfg.seed = static_cast<std::uint64_t>(seed);
  if (const char* env = std::getenv("BSUMKIT_SEED"); env && *env) {
    char* end = nullptr;
    const unsigned long long v = std::strtoull(env, &end, 10);
    if (*end != '\0') throw ConfigError("BSUMKIT_SEED is not a nonnegative integer: '" + std::string(env) + "'");
    cfg.seed = v;
  }

  const Node inputs = root.child("inputs");
  inputs.allow(schema.inputs);
  for (const char* key : schema.inputs) {
    if (!inputs.has(key)) continue;
    const fs::path p = resolve(base_dir, inputs.text(key));
    if (!fs::exists(p)) throw ConfigError(inputs.at(key) + ": file not found: " + p.string());
  }
  root.child("params").allow(schema.params);
  const Node rule = root.child("rule");
  if (schema.has_rule) {
    rule.allow({"kind", "q", "seed"});
  } else {
    rule.allow({});
  }
  cfg.stop = parse_stop(root.child("stop"));
  const Node outputs = root.child("outputs");
  outputs.allow({"trace", "solution"});
  if (outputs.has("trace")) cfg.trace_path = resolve(base_dir, outputs.text("trace"));
  if (outputs.has("solution")) cfg.solution_path = resolve(base_dir, outputs.text("solution"));
  const Node validation = root.child("validation");
  validation.allow({"samples", "seed"});

  cfg.inputs_json = doc.value("inputs", json::object()).dump();
  cfg.params_json = doc.value("params", json::object()).dump();
  cfg.rule_json = doc.value("rule", json::object()).dump();
  cfg.validation_json = doc.value("validation", json::object()).dump();
  return cfg;
}

RunConfig load_run_config(const fs::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw ConfigError("cannot open config " + path.string());
  std::stringstream ss;
  ss << f.rdbuf();
  try {
    return parse_run_config(ss.str(), path.has_parent_path() ? path.parent_path() : fs::path("."));
  } catch (const ConfigError& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

int exit_code_for(TerminalStatus status) {
  switch (status) {
    case TerminalStatus::converged:
    case TerminalStatus::max_iters:
      return 0;
    default:
      return 2;
  }
}

RunOutcome execute_config(const RunConfig& cfg) {
  const Inputs in{cfg, json::parse(cfg.inputs_json)};
  const json pj = json::parse(cfg.params_json);
  const Node params(pj, "$.params");
  RunOutcome out;
  Trace trace;

  if (cfg.solver == "lasso") {
    const MatrixXd A = in.matrix("A");
    const VectorXd b = in.vector("b");
    std::vector<Index> sizes;
    if (params.has("block_sizes")) {
      for (const auto& v : params.raw("block_sizes")) {
        if (!v.is_number_integer()) throw ConfigError("$.params.block_sizes: expected integers");
        sizes.push_back(v.get<Index>());
      }
    } else {
      sizes = even_partition(A.cols(), params.integer("blocks", 1));
    }
    const auto rule = parse_rule(cfg, static_cast<Index>(sizes.size()));
    auto res = lasso_bcpg(A, b, params.number("lambda"), sizes, rule, cfg.stop);
    write_solution(cfg.solution_path, MatrixXd(res.x), out);
    trace = std::move(res.trace);
  } else if (cfg.solver == "nmf") {
    const MatrixXd V = in.matrix("V");
    NmfOptions o;
    o.seed = cfg.seed;
    o.epsilon = params.number("epsilon", o.epsilon);
    auto res = nmf_factorize(V, params.integer("rank"), cfg.stop, o);
    if (!cfg.solution_path.empty()) {
      write_solution(sibling(cfg.solution_path, "W"), res.factors.W, out);
      write_solution(sibling(cfg.solution_path, "H"), res.factors.H, out);
    }
    trace = std::move(res.trace);
  } else if (cfg.solver == "irls") {
    const MatrixXd A = in.matrix("A");
    const VectorXd b = in.vector("b");
    IrlsOptions o;
    o.eta = params.number("eta", o.eta);
    if (params.has("lambda")) o.h = Nonsmooth::l1(params.number("lambda"));
    auto res = irls_solve(l1_row_terms(A, b), cfg.stop, o);
    write_solution(cfg.solution_path, MatrixXd(res.x), out);
    trace = std::move(res.trace);
  } else if (cfg.solver == "cp") {
    const TensorData X = in.tensor("X");
    CpOptions o;
    o.seed = cfg.seed;
    o.gamma = params.number("gamma", o.gamma);
    const std::string mode = params.text("mode", std::string("plain_als"));
    if (mode == "plain_als") {
      o.mode = CpMode::plain_als;
    } else if (mode == "proximal_als") {
      o.mode = CpMode::proximal_als;
    } else if (mode == "diminishing_proximal") {
      o.mode = CpMode::diminishing_proximal;
    } else {
      throw ConfigError("$.params.mode: unknown mode '" + mode + "' (plain_als, proximal_als, diminishing_proximal)");
    }
    auto res = cp_decompose(X, params.integer("rank"), cfg.stop, o);
    if (!cfg.solution_path.empty()) {
      write_solution(sibling(cfg.solution_path, "A"), res.factors.A, out);
      write_solution(sibling(cfg.solution_path, "B"), res.factors.B, out);
      write_solution(sibling(cfg.solution_path, "C"), res.factors.C, out);
    }
    trace = std::move(res.trace);
  } else if (cfg.solver == "em") {
    const MatrixXd alpha = in.matrix("alpha");
    const VectorXd rho0 = in.has("rho0") ? in.vector("rho0")
                                         : VectorXd(VectorXd::Constant(alpha.cols(), 1.0 / static_cast<double>(alpha.cols())));
    auto res = em_abundance(alpha, rho0, cfg.stop);
    write_solution(cfg.solution_path, MatrixXd(res.model.rho), out);
    trace = std::move(res.trace);
  } else if (cfg.solver == "wmmse") {
    InterferenceChannel ch;
    const Index K = params.integer("K");
    if (in.has("H")) {
      const MatrixXcd H = in.complex_matrix("H");
      if (K < 1 || H.rows() % K != 0 || H.cols() % K != 0) {
        throw ConfigError("$.inputs.H: expected a (K*N) x (K*M) block matrix for K = " + std::to_string(K));
      }
      ch.K = K;
      ch.N = H.rows() / K;
      ch.M = H.cols() / K;
      for (Index k = 0; k < K; ++k) {
        for (Index j = 0; j < K; ++j) ch.H.push_back(H.block(k * ch.N, j * ch.M, ch.N, ch.M));
      }
    } else {
      ch = random_channel(K, params.integer("M"), params.integer("N"), cfg.seed);
    }
    VectorXd P(K);
    if (params.has("P") && params.raw("P").is_array()) {
      const auto& arr = params.raw("P");
      if (static_cast<Index>(arr.size()) != K) throw ConfigError("$.params.P: need one budget per user");
      for (Index k = 0; k < K; ++k) P[k] = arr.at(static_cast<std::size_t>(k)).get<double>();
    } else {
      P.setConstant(params.number("P", 1.0));
    }
    WmmseOptions o;
    o.seed = cfg.seed;
    auto res = wmmse_design(ch, P, params.number("sigma2", 1.0), cfg.stop, o);
    if (!cfg.solution_path.empty()) {
      MatrixXcd V(ch.M, K), U(ch.N, K);
      for (Index k = 0; k < K; ++k) {
        V.col(k) = res.beamformers.v[static_cast<std::size_t>(k)];
        U.col(k) = res.beamformers.u[static_cast<std::size_t>(k)];
      }
      write_solution(sibling(cfg.solution_path, "V"), V, out);
      write_solution(sibling(cfg.solution_path, "U"), U, out);
    }
    trace = std::move(res.trace);
  } else if (cfg.solver == "pathology") {
    BlockVector start({1});
    const Problem p = pathology_problem(params, start);
    const Surrogate s = parse_surrogate(params);
    const auto rule = parse_rule(cfg, p.num_blocks());
    RunResult res;
    if (p.coupling) {
      const auto mm = run_bsumm(p, {s}, 1.0, rule, cfg.stop, start);
      res = RunResult{mm.x, mm.trace};
    } else {
      res = run_bsum(p, {s}, rule, cfg.stop, start);
    }
    write_solution(cfg.solution_path, MatrixXd(res.x.flat()), out);
    trace = std::move(res.trace);
  } else if (cfg.solver == "ssum_ls") {
    const MatrixXd A = in.matrix("A");
    const VectorXd b = in.vector("b");
    const std::string fam = params.text("family", std::string("proximal"));
    SurrogateKind kind;
    if (fam == "quadratic") {
      kind = SurrogateKind::quadratic;
    } else if (fam == "proximal") {
      kind = SurrogateKind::proximal;
    } else {
      throw ConfigError("$.params.family: unknown family '" + fam + "' (quadratic, proximal)");
    }
    const auto stream = least_squares_stream(A, b, kind, params.number("gamma", 0.1), cfg.seed);
    auto res = run_ssum(stream, {FeasibleSet::unconstrained(A.cols())}, cfg.stop);
    write_solution(cfg.solution_path, MatrixXd(res.x.flat()), out);
    trace = std::move(res.trace);
  } else {
    schema_for(cfg.solver);
  }

  write_trace(cfg, trace, out);
  out.status = trace.status;
  out.iterations = trace.records.empty() ? 0 : trace.records.back().r;
  out.final_objective = trace.records.empty() ? 0.0 : trace.records.back().f;
  out.trace = std::move(trace);
  return out;
}

int cli_run(const fs::path& config, std::ostream& out, std::ostream& err) {
  try {
    const RunConfig cfg = load_run_config(config);
    const RunOutcome res = execute_config(cfg);
    out << "solver: " << cfg.solver << "\n"
        << "terminal_status: " << to_string(res.status) << "\n"
        << "iterations: " << res.iterations << "\n";
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", res.final_objective);
    out << "final_objective: " << buf << "\n";
    for (const auto& n : res.trace.notes) out << "note: " << n << "\n";
    for (const auto& p : res.written) out << "wrote: " << p.string() << "\n";
    return exit_code_for(res.status);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return 1;
  } catch (const DivergenceError& e) {
    err << "divergence: " << e.what() << "\n";
    out << "terminal_status: divergence\n";
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
}

int cli_validate_surrogate(const fs::path& config, std::ostream& out, std::ostream& err) {
  try {
    const RunConfig cfg = load_run_config(config);
    const Inputs in{cfg, json::parse(cfg.inputs_json)};
    const json pj = json::parse(cfg.params_json);
    const Node params(pj, "$.params");
    const json vj = json::parse(cfg.validation_json);
    const Node vnode(vj, "$.validation");
    const int samples = static_cast<int>(vnode.integer("samples", 200));
    const auto vseed = static_cast<std::uint64_t>(vnode.integer("seed", static_cast<std::int64_t>(cfg.seed)));

    std::optional<Problem> problem;
    std::vector<Surrogate> surr;
    std::optional<BlockVector> at;
    if (cfg.solver == "lasso") {
      const MatrixXd A = in.matrix("A");
      const VectorXd b = in.vector("b");
      const auto sizes = params.has("block_sizes") ? params.raw("block_sizes").get<std::vector<Index>>()
                                                   : even_partition(A.cols(), params.integer("blocks", 1));
      problem = make_lasso_problem(A, b, params.number("lambda"), sizes);
      for (double L : lasso_block_lipschitz(A, sizes)) surr.push_back(Surrogate::quadratic(L));
      at = problem->zeros();
    } else if (cfg.solver == "nmf") {
      const MatrixXd V = in.matrix("V");
      const Index K = params.integer("rank");
      problem = make_nmf_problem(V, K);
      surr.push_back(nmf_surrogate(V, K, params.number("epsilon", 1e-12)));
      at = nmf_pack(nmf_default_init(V.rows(), V.cols(), K, cfg.seed));
    } else if (cfg.solver == "pathology") {
      BlockVector start({1});
      problem = pathology_problem(params, start);
      surr.push_back(parse_surrogate(params));
      at = start;
    } else {
      err << "config error: validate-surrogate supports lasso, nmf and pathology configs, not '" << cfg.solver
          << "'\n";
      return 1;
    }
    const auto report = validate_assumption_a(surr, *problem, *at, samples, vseed);
    out << format_report(report) << "\n";
    return report.passed() ? 0 : 2;
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
}

int cli_reproduce(const std::string& name, const fs::path& out_dir, std::ostream& out, std::ostream& err) {
  bool known = false;
  for (const auto& n : experiment_names()) known = known || n == name;
  if (!known) {
    std::string valid;
    for (const auto& n : experiment_names()) valid += (valid.empty() ? "" : ", ") + n;
    err << "unknown experiment '" << name << "'; valid: " << valid << "\n";
    return 1;
  }
  try {
    std::uint64_t seed = 0;
    if (const char* env = std::getenv("BSUMKIT_SEED"); env && *env) seed = std::strtoull(env, nullptr, 10);
    const auto report = run_experiment(name, seed);
    print_report(report, out);
    for (const auto& p : write_report_traces(report, out_dir / name)) out << "wrote: " << p.string() << "\n";
    return report.passed() ? 0 : 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace bsum
