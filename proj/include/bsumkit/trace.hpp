#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace bsum {

enum class TerminalStatus { running, converged, max_iters, budget, detected_cycle };

std::string to_string(TerminalStatus status);

struct TraceRecord {
  std::size_t r = 0;
  std::vector<Eigen::Index> blocks;  // zero-based; written one-based in CSV
  double f = 0.0;
  double step_norm = 0.0;
  std::optional<double> stat_gap;
  std::optional<double> feas_residual;
  std::optional<double> wall_ms;
};

struct Trace {
  std::vector<TraceRecord> records;
  TerminalStatus status = TerminalStatus::running;
  std::vector<std::string> notes;
  // Points of a detected cycle, in visiting order.
  std::vector<Eigen::VectorXd> cycle;

  std::vector<double> objective_values() const;
  std::optional<double> last_gap() const;

  void write_csv(std::ostream& out) const;
  std::string to_csv() const;
  static Trace read_csv(std::istream& in);
};

inline constexpr const char* kTraceHeader = "r,blocks,f,step_norm,stat_gap,feas_residual,wall_ms";

}  // namespace bsum
