#pragma once

#include <optional>
#include <vector>

#include "bsumkit/engine.hpp"

namespace bsum {

struct LassoOptions {
  std::optional<VectorXd> x0;
  bool record_wall_time = false;
  // Iterations between prox-residual evaluations; unset means one sweep.
  std::optional<std::size_t> gap_interval;
};

struct LassoResult {
  VectorXd x;
  Trace trace;
  std::vector<double> lipschitz;  // per-block curvature L_j used by the updates
};

// Contiguous column blocks of the given sizes.
LassoResult lasso_bcpg(const MatrixXd& A, const VectorXd& b, double lambda,
                       const std::vector<Index>& block_sizes, SelectionRule rule,
                       const StopCriteria& stop, const LassoOptions& options = {});

double lasso_objective(const MatrixXd& A, const VectorXd& b, double lambda, const VectorXd& x);

// Sizes of `blocks` nearly equal contiguous blocks covering n columns.
std::vector<Index> even_partition(Index n, Index blocks);

// The same problem for the generic engine: g = 0.5||Ax - b||^2, h_j = lambda||.||_1.
Problem make_lasso_problem(const MatrixXd& A, const VectorXd& b, double lambda,
                           const std::vector<Index>& block_sizes);

// 1.01 * largest eigenvalue of A_j'A_j for each block.
std::vector<double> lasso_block_lipschitz(const MatrixXd& A, const std::vector<Index>& block_sizes);

}  // namespace bsum
