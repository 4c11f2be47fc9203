#include "bsumkit/selection.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "bsumkit/errors.hpp"

namespace bsum {

std::string to_string(RuleKind kind) {
  switch (kind) {
    case RuleKind::cyclic: return "cyclic";
    case RuleKind::essentially_cyclic: return "essentially_cyclic";
    case RuleKind::gauss_southwell: return "gauss_southwell";
    case RuleKind::mbi: return "mbi";
    case RuleKind::randomized: return "randomized";
    case RuleKind::all_blocks: return "all_blocks";
  }
  return "unknown";
}

namespace {

void check_n(Index n) {
  if (n <= 0) throw PreconditionError("selection rule needs at least one block");
}

void check_probabilities(const Eigen::VectorXd& p, Index n) {
  if (p.size() != n) {
    throw DimensionError("probability vector has " + std::to_string(p.size()) + " entries for " +
                         std::to_string(n) + " blocks");
  }
  if (!(p.minCoeff() > 0.0)) throw PreconditionError("every block probability must be positive");
  if (std::abs(p.sum() - 1.0) > 1e-12) throw PreconditionError("block probabilities must sum to one");
}

}  // namespace

SelectionRule SelectionRule::cyclic(Index n) {
  check_n(n);
  SelectionRule r;
  r.kind_ = RuleKind::cyclic;
  r.n_ = n;
  return r;
}

SelectionRule SelectionRule::essentially_cyclic(Index n, std::vector<std::vector<Index>> schedule,
                                                Index period) {
  check_n(n);
  if (period < 1) throw PreconditionError("essentially cyclic period must be at least 1");
  if (schedule.empty()) throw PreconditionError("essentially cyclic schedule is empty");
  for (const auto& step : schedule) {
    if (step.empty()) throw PreconditionError("essentially cyclic schedule has an empty step");
    for (Index i : step) {
      if (i < 0 || i >= n) throw DimensionError("schedule index " + std::to_string(i) + " out of range");
    }
  }
  // Every window of `period` consecutive steps (wrapping) must touch all blocks.
  const std::size_t L = schedule.size();
  for (std::size_t start = 0; start < L; ++start) {
    std::vector<bool> seen(static_cast<std::size_t>(n), false);
    for (Index k = 0; k < period; ++k) {
      for (Index i : schedule[(start + static_cast<std::size_t>(k)) % L]) seen[static_cast<std::size_t>(i)] = true;
    }
    const auto miss = std::find(seen.begin(), seen.end(), false);
    if (miss != seen.end()) {
      throw PreconditionError("block " + std::to_string(miss - seen.begin()) +
                              " is not updated within a window of " + std::to_string(period) +
                              " steps starting at step " + std::to_string(start));
    }
  }
  SelectionRule r;
  r.kind_ = RuleKind::essentially_cyclic;
  r.n_ = n;
  r.schedule_ = std::move(schedule);
  r.period_ = period;
  return r;
}

SelectionRule SelectionRule::essentially_cyclic(Index n, std::uint64_t seed) {
  check_n(n);
  std::vector<Index> perm(static_cast<std::size_t>(n));
  std::iota(perm.begin(), perm.end(), Index{0});
  std::mt19937_64 rng(seed);
  std::shuffle(perm.begin(), perm.end(), rng);
  std::vector<std::vector<Index>> schedule;
  for (Index i : perm) schedule.push_back({i});
  // Wrapping windows of a repeated permutation need length n to cover all.
  return essentially_cyclic(n, std::move(schedule), n);
}

SelectionRule SelectionRule::gauss_southwell(Index n, double q) {
  check_n(n);
  if (!(q > 0.0 && q <= 1.0)) throw PreconditionError("Gauss-Southwell q must lie in (0, 1]");
  SelectionRule r;
  r.kind_ = RuleKind::gauss_southwell;
  r.n_ = n;
  r.q_ = q;
  return r;
}

SelectionRule SelectionRule::mbi(Index n) {
  check_n(n);
  SelectionRule r;
  r.kind_ = RuleKind::mbi;
  r.n_ = n;
  return r;
}

SelectionRule SelectionRule::randomized(Index n, std::uint64_t seed, Eigen::VectorXd p,
                                        ProbabilityHook hook) {
  check_n(n);
  if (p.size() == 0) p = Eigen::VectorXd::Constant(n, 1.0 / static_cast<double>(n));
  check_probabilities(p, n);
  SelectionRule r;
  r.kind_ = RuleKind::randomized;
  r.n_ = n;
  r.p_ = std::move(p);
  r.hook_ = std::move(hook);
  r.seed_ = seed;
  r.rng_.seed(seed);
  return r;
}

SelectionRule SelectionRule::all_blocks(Index n) {
  check_n(n);
  SelectionRule r;
  r.kind_ = RuleKind::all_blocks;
  r.n_ = n;
  return r;
}

bool SelectionRule::single_block() const {
  if (kind_ == RuleKind::all_blocks) return n_ == 1;
  if (kind_ == RuleKind::essentially_cyclic) {
    return std::all_of(schedule_.begin(), schedule_.end(),
                       [](const std::vector<Index>& s) { return s.size() == 1; });
  }
  return true;
}

Index SelectionRule::coverage_window() const {
  switch (kind_) {
    case RuleKind::all_blocks: return 1;
    case RuleKind::essentially_cyclic: return period_;
    default: return n_;
  }
}

Index SelectionRule::draw(const Eigen::VectorXd& p) {
  // 53-bit uniform in [0, 1), then inverse CDF; fixed arithmetic keeps the
  // stream identical across standard library implementations.
  const double u = static_cast<double>(rng_() >> 11) * 0x1.0p-53;
  double acc = 0.0;
  for (Index i = 0; i < p.size(); ++i) {
    acc += p[i];
    if (u < acc) return i;
  }
  return p.size() - 1;
}

std::vector<Index> SelectionRule::select(std::size_t r, const Candidates* candidates) {
  switch (kind_) {
    case RuleKind::cyclic: return {static_cast<Index>(r % static_cast<std::size_t>(n_))};
    case RuleKind::essentially_cyclic: return schedule_[r % schedule_.size()];
    case RuleKind::all_blocks: {
      std::vector<Index> all(static_cast<std::size_t>(n_));
      std::iota(all.begin(), all.end(), Index{0});
      return all;
    }
    case RuleKind::gauss_southwell: {
      if (!candidates || static_cast<Index>(candidates->step_norms.size()) != n_) {
        throw PreconditionError("Gauss-Southwell needs candidate step norms for every block");
      }
      const auto& s = candidates->step_norms;
      const double mx = *std::max_element(s.begin(), s.end());
      for (Index i = 0; i < n_; ++i) {
        if (s[static_cast<std::size_t>(i)] >= q_ * mx) return {i};
      }
      return {0};
    }
    case RuleKind::mbi: {
      if (!candidates || static_cast<Index>(candidates->objectives.size()) != n_) {
        throw PreconditionError("MBI needs candidate objective values for every block");
      }
      const auto& f = candidates->objectives;
      return {static_cast<Index>(std::min_element(f.begin(), f.end()) - f.begin())};
    }
    case RuleKind::randomized: {
      if (hook_) {
        Eigen::VectorXd p = hook_(r);
        check_probabilities(p, n_);
        return {draw(p)};
      }
      return {draw(p_)};
    }
  }
  return {};
}

std::string SelectionRule::describe() const {
  std::ostringstream os;
  os << to_string(kind_) << "(n=" << n_;
  if (kind_ == RuleKind::gauss_southwell) os << ", q=" << q_;
  if (kind_ == RuleKind::randomized) os << ", seed=" << seed_;
  if (kind_ == RuleKind::essentially_cyclic) os << ", T=" << period_;
  os << ")";
  return os.str();
}

}  // namespace bsum
