#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "bsumkit/problem.hpp"

namespace bsum {

enum class BehaviorKind { stuck_point, cycle, oscillation, converges_to };

std::string to_string(BehaviorKind kind);

struct ExpectedBehavior {
  BehaviorKind kind = BehaviorKind::stuck_point;
  // stuck_point: one point; cycle/oscillation: the points visited in order.
  std::vector<VectorXd> points;
  int period = 0;
  double value = 0.0;
};

struct PathologyFixture {
  Problem problem;
  BlockVector start;
  ExpectedBehavior expected;
};

struct PathologyOptions {
  double powell_epsilon = 1e-2;
};

const std::vector<std::string>& pathology_names();

PathologyFixture build_pathology(std::string_view name, const PathologyOptions& options = {});

// argmin_x sum_k w_k |x - t_k| + gamma/2 (x - z)^2 on [lo, hi]; flat
// minimizing intervals resolve to the point nearest z.
double minimize_weighted_abs_1d(const std::vector<double>& weights,
                                const std::vector<double>& breakpoints, double gamma, double z,
                                double lo, double hi);

}  // namespace bsum
