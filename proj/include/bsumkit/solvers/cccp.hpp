#pragma once

#include <functional>
#include <optional>

#include "bsumkit/engine.hpp"

namespace bsum {

struct ConvexPart {
  std::function<double(const VectorXd&)> value;
  std::function<VectorXd(const VectorXd&)> gradient;
  // argmin_x g(x) - <c, x>; optional, the fallback is gradient descent.
  std::function<VectorXd(const VectorXd& c, const VectorXd& warm)> tilted_argmin;
};

struct CccpOptions {
  InnerSolverBudget inner{10000, 1e-10};
  std::function<void(std::size_t, const VectorXd&)> observer;
};

struct CccpResult {
  VectorXd x;
  Trace trace;
};

// Minimizes g1 - g2 by x <- argmin g1(x) - <x, grad g2(x^r)>.
CccpResult cccp_minimize(const ConvexPart& g1, const ConvexPart& g2, const VectorXd& x0,
                         const StopCriteria& stop, const CccpOptions& options = {});

}  // namespace bsum
