#pragma once

#include <functional>

#include "bsumkit/engine.hpp"

namespace bsum {

struct AbundanceModel {
  MatrixXd alpha;  // N x M, alpha(n, m) >= 0
  VectorXd rho;    // on the simplex
};

struct EmOptions {
  // Fixed-point stop on ||rho^{r+1} - rho^r||_1.
  double fixed_point_tol = 1e-12;
  std::function<void(std::size_t, const VectorXd&)> observer;
};

struct EmResult {
  AbundanceModel model;
  Trace trace;
};

// -sum_n log sum_m alpha(n, m) rho(m)
double em_negative_log_likelihood(const MatrixXd& alpha, const VectorXd& rho);

// rho(m) <- (1/N) sum_n alpha(n, m) rho(m) / sum_m' alpha(n, m') rho(m')
VectorXd em_update(const MatrixXd& alpha, const VectorXd& rho);

EmResult em_abundance(const MatrixXd& alpha, const VectorXd& rho0, const StopCriteria& stop,
                      const EmOptions& options = {});

}  // namespace bsum
