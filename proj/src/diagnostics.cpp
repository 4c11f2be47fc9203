#include "bsumkit/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "bsumkit/errors.hpp"
#include "bsumkit/surrogate.hpp"

namespace bsum {

std::optional<double> prox_residual(const Problem& problem, const BlockVector& x) {
  if (!problem.composite_smooth()) return std::nullopt;
  double sq = 0.0;
  for (Index i = 0; i < problem.num_blocks(); ++i) {
    const auto ui = static_cast<std::size_t>(i);
    const VectorXd xi = x.block(i);
    const VectorXd g = eval_block_gradient(problem, i, x);
    sq += (xi - prox_onto(problem.nonsmooth[ui], problem.sets[ui], xi - g, 1.0)).squaredNorm();
  }
  return std::sqrt(sq);
}

namespace {

double coordinatewise_gap(const Problem& problem, const BlockVector& x, std::string& method) {
  const double fx = eval_objective(problem, x);
  double worst = 0.0;
  method = problem.block_solver ? "exact block solver" : "proximal inner solve";
  for (Index i = 0; i < problem.num_blocks(); ++i) {
    VectorXd y;
    if (problem.block_solver) {
      y = problem.block_solver(x, i, 0.0);
    } else {
      // A tiny proximal term keeps the inner problem well posed.
      Surrogate s = Surrogate::proximal(1e-10);
      s.budget.max_iters = 100000;
      s.budget.tolerance = 1e-12;
      try {
        y = minimize_block_surrogate(s, problem, i, x);
      } catch (const BudgetExceeded& e) {
        y = e.best_iterate();
      }
    }
    const double fy = eval_objective(problem, x.with_block(i, y));
    worst = std::max(worst, fx - fy);
  }
  return std::max(worst, 0.0);
}

double sampled_gap(const Problem& problem, const BlockVector& x, const GapOptions& options) {
  std::mt19937_64 rng(options.seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  double most_negative = 0.0;
  auto try_direction = [&](const VectorXd& raw) {
    // Turn the raw direction into a feasible one: d = P(x + raw) - x.
    BlockVector y(x.dims(), x.flat() + raw);
    VectorXd d = problem.project(y).flat() - x.flat();
    const double nd = d.norm();
    if (nd < 1e-9) return;
    d /= nd;
    if (nd < 1e-3) {
      // Too short for the ladder to stay feasible; skip.
      return;
    }
    try {
      const double dd = directional_derivative(problem, x, d);
      most_negative = std::min(most_negative, dd);
    } catch (const InfeasibleError&) {
    }
  };
  for (const auto& d : options.probe_directions) {
    if (d.size() != x.total_dim()) throw DimensionError("probe direction has the wrong length");
    const double nd = d.norm();
    if (nd > 0.0) try_direction(d / nd);
  }
  for (int k = 0; k < options.n_dirs; ++k) {
    VectorXd raw(x.total_dim());
    for (Index j = 0; j < raw.size(); ++j) raw[j] = gauss(rng);
    try_direction(raw / raw.norm());
  }
  return -most_negative;
}

}  // namespace

GapReport stationarity_gap(const Problem& problem, const BlockVector& x, const GapOptions& options) {
  problem.validate();
  problem.check_point(x);
  GapReport rep;
  if (auto pr = prox_residual(problem, x)) {
    rep.full_gap = *pr;
    rep.full_method = "prox residual";
  } else {
    rep.full_gap = sampled_gap(problem, x, options);
    rep.full_method = "sampled directional derivative (" + std::to_string(options.n_dirs) +
                      " directions; certifies non-stationarity only)";
  }
  rep.coordinatewise_gap = coordinatewise_gap(problem, x, rep.coordinatewise_method);
  return rep;
}

DescentCheck verify_monotone_descent(std::span<const double> f, double slack) {
  if (f.empty()) throw PreconditionError("descent check needs a nonempty trace");
  for (std::size_t k = 1; k < f.size(); ++k) {
    if (!(f[k] <= f[k - 1] + slack)) return DescentCheck{false, k};
  }
  return DescentCheck{true, std::nullopt};
}

DescentCheck verify_monotone_descent(const Trace& trace, double slack) {
  const auto f = trace.objective_values();
  return verify_monotone_descent(std::span<const double>(f), slack);
}

std::string to_string(RateClass c) {
  switch (c) {
    case RateClass::sublinear: return "sublinear";
    case RateClass::linear: return "linear";
    case RateClass::stalled: return "stalled";
  }
  return "unknown";
}

namespace {

struct Fit {
  double slope = 0.0;
  double sse = 0.0;
};

Fit least_squares_line(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    mx += x[k];
    my += y[k];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    sxx += (x[k] - mx) * (x[k] - mx);
    sxy += (x[k] - mx) * (y[k] - my);
  }
  Fit fit;
  fit.slope = sxx > 0.0 ? sxy / sxx : 0.0;
  const double icpt = my - fit.slope * mx;
  for (std::size_t k = 0; k < x.size(); ++k) {
    const double e = y[k] - (icpt + fit.slope * x[k]);
    fit.sse += e * e;
  }
  return fit;
}

}  // namespace

RateEstimate estimate_rate_exponent(std::span<const double> r, std::span<const double> f,
                                    double f_star, double tail_fraction) {
  if (r.size() != f.size()) throw DimensionError("rate fit needs equally long r and f");
  if (!(tail_fraction > 0.0 && tail_fraction <= 1.0)) {
    throw PreconditionError("tail fraction must lie in (0, 1]");
  }
  RateEstimate est;
  std::vector<double> rr, gap;
  for (std::size_t k = 0; k < r.size(); ++k) {
    if (r[k] < 1.0) continue;
    const double g = f[k] - f_star;
    if (!(g > 0.0)) {
      // Everything from here on is at or below the reference.
      est.truncated = r.size() - k;
      est.note = "truncated at r=" + std::to_string(static_cast<long long>(r[k])) +
                 " where f - f* <= 0";
      break;
    }
    rr.push_back(r[k]);
    gap.push_back(g);
  }
  const std::size_t start =
      rr.size() - static_cast<std::size_t>(std::ceil(tail_fraction * static_cast<double>(rr.size())));
  std::vector<double> logr, logg, lin;
  for (std::size_t k = start; k < rr.size(); ++k) {
    logr.push_back(std::log(rr[k]));
    logg.push_back(std::log(gap[k]));
    lin.push_back(rr[k]);
  }
  est.points_used = logr.size();
  if (logr.size() < 3) {
    est.classification = RateClass::stalled;
    if (!est.note.empty()) est.note += "; ";
    est.note += "fewer than 3 usable points";
    return est;
  }
  const Fit loglog = least_squares_line(logr, logg);
  const Fit semilog = least_squares_line(lin, logg);
  est.exponent = loglog.slope;
  if (semilog.sse < loglog.sse && semilog.slope < 0.0) {
    est.classification = RateClass::linear;
  } else if (loglog.slope > -0.05) {
    est.classification = RateClass::stalled;
  } else {
    est.classification = RateClass::sublinear;
  }
  return est;
}

RateEstimate estimate_rate_exponent(const Trace& trace, double f_star, double tail_fraction) {
  std::vector<double> r, f;
  for (const auto& rec : trace.records) {
    r.push_back(static_cast<double>(rec.r));
    f.push_back(rec.f);
  }
  return estimate_rate_exponent(std::span<const double>(r), std::span<const double>(f), f_star,
                                tail_fraction);
}

}  // namespace bsum
