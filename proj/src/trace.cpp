#include "bsumkit/trace.hpp"

#include <charconv>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>

#include "bsumkit/errors.hpp"

namespace bsum {

std::string to_string(TerminalStatus status) {
  switch (status) {
    case TerminalStatus::running: return "running";
    case TerminalStatus::converged: return "converged";
    case TerminalStatus::max_iters: return "max_iters";
    case TerminalStatus::budget: return "budget";
    case TerminalStatus::detected_cycle: return "detected_cycle";
  }
  return "unknown";
}

std::vector<double> Trace::objective_values() const {
  std::vector<double> f;
  f.reserve(records.size());
  for (const auto& rec : records) f.push_back(rec.f);
  return f;
}

std::optional<double> Trace::last_gap() const {
  for (auto it = records.rbegin(); it != records.rend(); ++it) {
    if (it->stat_gap) return it->stat_gap;
  }
  return std::nullopt;
}

namespace {

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == sep) {
      out.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  out.push_back(cur);
  return out;
}

double parse_double(const std::string& s, std::size_t line) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw ConfigError("trace line " + std::to_string(line) + ": bad number '" + s + "'");
  }
}

std::optional<double> parse_optional(const std::string& s, std::size_t line) {
  if (s.empty()) return std::nullopt;
  return parse_double(s, line);
}

}  // namespace

void Trace::write_csv(std::ostream& out) const {
  out << kTraceHeader << '\n';
  for (const auto& rec : records) {
    out << rec.r << ',';
    for (std::size_t k = 0; k < rec.blocks.size(); ++k) {
      if (k) out << '+';
      out << rec.blocks[k] + 1;
    }
    out << ',' << fmt(rec.f) << ',' << fmt(rec.step_norm) << ',';
    if (rec.stat_gap) out << fmt(*rec.stat_gap);
    out << ',';
    if (rec.feas_residual) out << fmt(*rec.feas_residual);
    out << ',';
    if (rec.wall_ms) out << fmt(*rec.wall_ms);
    out << '\n';
  }
}

std::string Trace::to_csv() const {
  std::ostringstream os;
  write_csv(os);
  return os.str();
}

Trace Trace::read_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != kTraceHeader) {
    throw ConfigError("trace CSV header mismatch: '" + line + "'");
  }
  Trace t;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto cols = split(line, ',');
    if (cols.size() != 7) {
      throw ConfigError("trace line " + std::to_string(lineno) + " has " +
                        std::to_string(cols.size()) + " fields, expected 7");
    }
    TraceRecord rec;
    rec.r = static_cast<std::size_t>(parse_double(cols[0], lineno));
    if (!cols[1].empty()) {
      for (const auto& b : split(cols[1], '+')) {
        rec.blocks.push_back(static_cast<Eigen::Index>(parse_double(b, lineno)) - 1);
      }
    }
    rec.f = parse_double(cols[2], lineno);
    rec.step_norm = parse_double(cols[3], lineno);
    rec.stat_gap = parse_optional(cols[4], lineno);
    rec.feas_residual = parse_optional(cols[5], lineno);
    rec.wall_ms = parse_optional(cols[6], lineno);
    if (!t.records.empty() && rec.r <= t.records.back().r) {
      throw ConfigError("trace line " + std::to_string(lineno) + ": r is not increasing");
    }
    t.records.push_back(std::move(rec));
  }
  return t;
}

}  // namespace bsum
