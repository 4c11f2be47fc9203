#pragma once

#include <cstdint>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace bsum {

using Eigen::Index;

enum class RuleKind { cyclic, essentially_cyclic, gauss_southwell, mbi, randomized, all_blocks };

std::string to_string(RuleKind kind);

// Candidate information per block: step norms ||xhat_i - x_i|| and objective
// values f(xhat_i, x_{-i}). Either may be empty when the rule does not need it.
struct Candidates {
  std::vector<double> step_norms;
  std::vector<double> objectives;
};

// Returns the probability vector to use at counter r (time-varying p^r).
using ProbabilityHook = std::function<Eigen::VectorXd(std::size_t)>;

// Block indices are zero-based. The counter r starts at 0 for the first
// update, so cyclic order visits 0, 1, ..., n-1, 0, ...
class SelectionRule {
 public:
  static SelectionRule cyclic(Index n);
  static SelectionRule essentially_cyclic(Index n, std::vector<std::vector<Index>> schedule,
                                          Index period);
  // A seeded permutation of 0..n-1 repeated; period n.
  static SelectionRule essentially_cyclic(Index n, std::uint64_t seed = 0);
  static SelectionRule gauss_southwell(Index n, double q = 1.0);
  static SelectionRule mbi(Index n);
  static SelectionRule randomized(Index n, std::uint64_t seed, Eigen::VectorXd p = {},
                                  ProbabilityHook hook = {});
  static SelectionRule all_blocks(Index n);

  std::vector<Index> select(std::size_t r, const Candidates* candidates = nullptr);

  RuleKind kind() const { return kind_; }
  Index num_blocks() const { return n_; }
  bool needs_step_norms() const { return kind_ == RuleKind::gauss_southwell; }
  bool needs_objectives() const { return kind_ == RuleKind::mbi; }
  bool single_block() const;
  // Longest run of calls needed to touch every block.
  Index coverage_window() const;
  double q() const { return q_; }
  const Eigen::VectorXd& probabilities() const { return p_; }
  const std::vector<std::vector<Index>>& schedule() const { return schedule_; }
  std::string describe() const;

 private:
  Index draw(const Eigen::VectorXd& p);

  RuleKind kind_ = RuleKind::cyclic;
  Index n_ = 0;
  std::vector<std::vector<Index>> schedule_;
  Index period_ = 0;
  double q_ = 1.0;
  Eigen::VectorXd p_;
  ProbabilityHook hook_;
  std::uint64_t seed_ = 0;
  std::mt19937_64 rng_;
};

}  // namespace bsum
