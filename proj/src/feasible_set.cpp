#include "bsumkit/feasible_set.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "bsumkit/errors.hpp"

namespace bsum {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

std::string to_string(SetKind kind) {
  switch (kind) {
    case SetKind::unconstrained: return "unconstrained";
    case SetKind::box: return "box";
    case SetKind::nonneg_orthant: return "nonneg_orthant";
    case SetKind::euclidean_ball: return "euclidean_ball";
    case SetKind::probability_simplex: return "probability_simplex";
  }
  return "unknown";
}

FeasibleSet FeasibleSet::unconstrained(Index dim) {
  if (dim <= 0) throw DimensionError("set dimension must be positive");
  FeasibleSet s;
  s.kind_ = SetKind::unconstrained;
  s.dim_ = dim;
  s.lo_ = VectorXd::Constant(dim, -kInf);
  s.hi_ = VectorXd::Constant(dim, kInf);
  return s;
}

FeasibleSet FeasibleSet::box(VectorXd lo, VectorXd hi) {
  if (lo.size() != hi.size() || lo.size() == 0) {
    throw DimensionError("box bounds must be nonempty and of equal length");
  }
  for (Index j = 0; j < lo.size(); ++j) {
    if (!(lo[j] <= hi[j])) {
      throw PreconditionError("box requires lo <= hi; violated at entry " + std::to_string(j));
    }
  }
  FeasibleSet s;
  s.kind_ = SetKind::box;
  s.dim_ = lo.size();
  s.lo_ = std::move(lo);
  s.hi_ = std::move(hi);
  return s;
}

FeasibleSet FeasibleSet::box(Index dim, double lo, double hi) {
  if (dim <= 0) throw DimensionError("set dimension must be positive");
  return box(VectorXd::Constant(dim, lo), VectorXd::Constant(dim, hi));
}

FeasibleSet FeasibleSet::nonneg(Index dim) {
  if (dim <= 0) throw DimensionError("set dimension must be positive");
  FeasibleSet s;
  s.kind_ = SetKind::nonneg_orthant;
  s.dim_ = dim;
  s.lo_ = VectorXd::Zero(dim);
  s.hi_ = VectorXd::Constant(dim, kInf);
  return s;
}

FeasibleSet FeasibleSet::ball(Index dim, double radius) {
  if (dim <= 0) throw DimensionError("set dimension must be positive");
  if (!(radius > 0.0)) throw PreconditionError("ball radius must be positive");
  FeasibleSet s;
  s.kind_ = SetKind::euclidean_ball;
  s.dim_ = dim;
  s.radius_ = radius;
  s.lo_ = VectorXd::Constant(dim, -radius);
  s.hi_ = VectorXd::Constant(dim, radius);
  return s;
}

FeasibleSet FeasibleSet::simplex(Index dim) {
  if (dim <= 0) throw DimensionError("set dimension must be positive");
  FeasibleSet s;
  s.kind_ = SetKind::probability_simplex;
  s.dim_ = dim;
  s.lo_ = VectorXd::Zero(dim);
  s.hi_ = VectorXd::Ones(dim);
  return s;
}

bool FeasibleSet::separable() const {
  return kind_ == SetKind::unconstrained || kind_ == SetKind::box ||
         kind_ == SetKind::nonneg_orthant;
}

bool FeasibleSet::bounded() const {
  if (kind_ == SetKind::euclidean_ball || kind_ == SetKind::probability_simplex) return true;
  if (kind_ == SetKind::box) return lo_.allFinite() && hi_.allFinite();
  return false;
}

void FeasibleSet::check_dim(const VectorXd& v) const {
  if (v.size() != dim_) {
    throw DimensionError("vector of length " + std::to_string(v.size()) + " given to a " +
                         to_string(kind_) + " set of dimension " + std::to_string(dim_));
  }
}

bool FeasibleSet::contains(const VectorXd& v, double tol) const {
  check_dim(v);
  if (!v.allFinite()) return false;
  switch (kind_) {
    case SetKind::unconstrained: return true;
    case SetKind::box:
    case SetKind::nonneg_orthant:
      for (Index j = 0; j < dim_; ++j) {
        if (v[j] < lo_[j] - tol || v[j] > hi_[j] + tol) return false;
      }
      return true;
    case SetKind::euclidean_ball: return v.norm() <= radius_ + tol;
    case SetKind::probability_simplex:
      return v.minCoeff() >= -tol && std::abs(v.sum() - 1.0) <= tol * static_cast<double>(dim_);
  }
  return false;
}

namespace {

VectorXd project_simplex(const VectorXd& v) {
  const Index n = v.size();
  std::vector<Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Index{0});
  std::stable_sort(order.begin(), order.end(), [&](Index a, Index b) { return v[a] > v[b]; });
  double cumsum = 0.0;
  double theta = 0.0;
  for (Index k = 0; k < n; ++k) {
    cumsum += v[order[static_cast<std::size_t>(k)]];
    const double t = (cumsum - 1.0) / static_cast<double>(k + 1);
    if (v[order[static_cast<std::size_t>(k)]] - t > 0.0) theta = t;
  }
  return (v.array() - theta).max(0.0).matrix();
}

}  // namespace

VectorXd FeasibleSet::project(const VectorXd& v) const {
  check_dim(v);
  switch (kind_) {
    case SetKind::unconstrained: return v;
    case SetKind::box:
    case SetKind::nonneg_orthant: return v.cwiseMax(lo_).cwiseMin(hi_);
    case SetKind::euclidean_ball: {
      const double nv = v.norm();
      if (nv <= radius_) return v;
      return v * (radius_ / nv);
    }
    case SetKind::probability_simplex: return project_simplex(v);
  }
  return v;
}

VectorXd FeasibleSet::sample_near(const VectorXd& center, double scale,
                                  std::mt19937_64& rng) const {
  check_dim(center);
  std::normal_distribution<double> gauss(0.0, 1.0);
  VectorXd v(dim_);
  for (Index j = 0; j < dim_; ++j) v[j] = center[j] + scale * gauss(rng);
  if (kind_ == SetKind::box && bounded()) {
    // Half the time draw uniformly from the whole box to reach far corners.
    std::uniform_real_distribution<double> coin(0.0, 1.0);
    if (coin(rng) < 0.5) {
      for (Index j = 0; j < dim_; ++j) {
        std::uniform_real_distribution<double> u(lo_[j], hi_[j]);
        v[j] = u(rng);
      }
      return v;
    }
  }
  return project(v);
}

VectorXd project(const FeasibleSet& set, const VectorXd& v) { return set.project(v); }

}  // namespace bsum
