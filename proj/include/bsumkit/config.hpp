#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

#include "bsumkit/engine.hpp"

namespace bsum {

// A parsed and schema-checked run configuration. Input and output paths are
// resolved against the directory holding the config file.
struct RunConfig {
  std::string solver;
  std::uint64_t seed = 0;
  StopCriteria stop;
  std::filesystem::path base_dir;
  std::filesystem::path trace_path;     // empty: no trace file
  std::filesystem::path solution_path;  // empty: no solution file

  // Raw sections, kept as JSON text for the solver-specific readers.
  std::string inputs_json = "{}";
  std::string params_json = "{}";
  std::string rule_json = "{}";
  std::string validation_json = "{}";
};

const std::vector<std::string>& solver_names();

// Throws ConfigError with "line:column" for syntax errors and a JSON path
// ("$.params.lamda") for schema errors. BSUMKIT_SEED, when set, overrides
// the seed.
RunConfig parse_run_config(const std::string& text, const std::filesystem::path& base_dir);
RunConfig load_run_config(const std::filesystem::path& path);

struct RunOutcome {
  TerminalStatus status = TerminalStatus::running;
  double final_objective = 0.0;
  std::size_t iterations = 0;
  std::vector<std::filesystem::path> written;
  Trace trace;
};

// Runs the solver and writes the trace and solution files.
RunOutcome execute_config(const RunConfig& config);

// Exit code for a finished run: 0 for converged or max_iters, 2 for a
// detected cycle or divergence.
int exit_code_for(TerminalStatus status);

// CLI verbs. Each returns the process exit code and never throws.
int cli_run(const std::filesystem::path& config, std::ostream& out, std::ostream& err);
int cli_validate_surrogate(const std::filesystem::path& config, std::ostream& out, std::ostream& err);
int cli_reproduce(const std::string& name, const std::filesystem::path& out_dir, std::ostream& out,
                  std::ostream& err);

}  // namespace bsum
