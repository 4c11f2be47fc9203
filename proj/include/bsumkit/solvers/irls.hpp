#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "bsumkit/engine.hpp"

namespace bsum {

// One term ||A_j x + b_j|| of the objective.
struct IrlsTerm {
  MatrixXd A;
  VectorXd b;
};

// Optional exact quadratic 0.5||Cx - d||^2 added to the objective.
struct QuadraticTerm {
  MatrixXd C;
  VectorXd d;
};

struct IrlsOptions {
  double eta = 1e-6;
  Nonsmooth h = Nonsmooth::zero();
  std::optional<QuadraticTerm> quadratic;
  std::optional<VectorXd> x0;
  InnerSolverBudget inner{10000, 1e-12};
  std::function<void(std::size_t, const VectorXd&)> observer;
};

struct IrlsResult {
  VectorXd x;
  Trace trace;
};

// Minimizes h(x) + q(x) + sum_j sqrt(||A_j x + b_j||^2 + eta^2) by repeatedly
// minimizing the arithmetic-geometric bound of the square roots.
IrlsResult irls_solve(const std::vector<IrlsTerm>& terms, const StopCriteria& stop,
                      const IrlsOptions& options = {});

// sum_j sqrt(||A_j x + b_j||^2 + eta^2)
double irls_smoothed(const std::vector<IrlsTerm>& terms, double eta, const VectorXd& x);
// 0.5 sum_j [(||A_j x + b_j||^2 + eta^2) / s_j + s_j], s_j at the anchor.
double irls_bound(const std::vector<IrlsTerm>& terms, double eta, const VectorXd& x,
                  const VectorXd& anchor);

// Each row of (A, b) as its own term: sum_k |a_k'x + b_k|.
std::vector<IrlsTerm> l1_row_terms(const MatrixXd& A, const VectorXd& b);

}  // namespace bsum
