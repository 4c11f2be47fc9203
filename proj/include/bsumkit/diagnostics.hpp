#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "bsumkit/problem.hpp"
#include "bsumkit/trace.hpp"

namespace bsum {

struct GapReport {
  double full_gap = 0.0;
  double coordinatewise_gap = 0.0;
  std::string full_method;
  std::string coordinatewise_method;
};

struct GapOptions {
  int n_dirs = 256;
  std::uint64_t seed = 0;
  // Extra directions tried by the sampled full gap (flat, any length).
  std::vector<VectorXd> probe_directions;
};

// Full gap: ||x - prox(x - grad g(x))|| (prox includes projection onto X) when
// the problem is composite-smooth. Otherwise the most negative sampled
// directional derivative along unit feasible directions, negated and clipped
// at 0. The sampled version can only certify non-stationarity.
// Coordinatewise gap: max_i f(x) - min over X_i of the block objective,
// using the problem's exact block solver (or the proximal inner solver).
GapReport stationarity_gap(const Problem& problem, const BlockVector& x,
                           const GapOptions& options = {});

// Composite-smooth prox residual, or nullopt if unavailable.
std::optional<double> prox_residual(const Problem& problem, const BlockVector& x);

struct DescentCheck {
  bool passed = true;
  std::optional<std::size_t> first_violation;  // record index
};

DescentCheck verify_monotone_descent(std::span<const double> f, double slack);
DescentCheck verify_monotone_descent(const Trace& trace, double slack);

enum class RateClass { sublinear, linear, stalled };

std::string to_string(RateClass c);

struct RateEstimate {
  double exponent = 0.0;
  RateClass classification = RateClass::stalled;
  std::size_t points_used = 0;
  std::size_t truncated = 0;
  std::string note;
};

// Fits log(f_r - f*) against log r over the last tail_fraction of the usable
// records (r >= 1, f_r - f* > 0); records where the gap is not positive are
// truncated and noted.
RateEstimate estimate_rate_exponent(std::span<const double> r, std::span<const double> f,
                                    double f_star, double tail_fraction = 0.5);
RateEstimate estimate_rate_exponent(const Trace& trace, double f_star, double tail_fraction = 0.5);

}  // namespace bsum
