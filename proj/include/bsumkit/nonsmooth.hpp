#pragma once

#include <functional>

#include "bsumkit/feasible_set.hpp"

namespace bsum {

VectorXd soft_threshold(const VectorXd& v, double t);

// A separable convex term h_i attached to one block.
class Nonsmooth {
 public:
  enum class Kind { zero, l1, custom };

  using ValueFn = std::function<double(const VectorXd&)>;
  // prox(v, t) = argmin_y t*h(y) + 0.5*||y - v||^2
  using ProxFn = std::function<VectorXd(const VectorXd&, double)>;

  static Nonsmooth zero() { return Nonsmooth(); }
  static Nonsmooth l1(double lambda);
  static Nonsmooth custom(ValueFn value, ProxFn prox = {});

  Kind kind() const { return kind_; }
  double lambda() const { return lambda_; }
  bool is_zero() const { return kind_ == Kind::zero; }

  double value(const VectorXd& x) const;
  bool has_prox() const { return kind_ != Kind::custom || static_cast<bool>(prox_); }
  VectorXd prox(const VectorXd& v, double t) const;

 private:
  Kind kind_ = Kind::zero;
  double lambda_ = 0.0;
  ValueFn value_;
  ProxFn prox_;
};

// Whether argmin_y t*h(y) + 0.5*||y - v||^2 over a set has a closed form here.
bool prox_onto_available(const Nonsmooth& h, const FeasibleSet& set);

// argmin over y in set of t*h(y) + 0.5*||y - v||^2.
VectorXd prox_onto(const Nonsmooth& h, const FeasibleSet& set, const VectorXd& v, double t);

// Same with per-entry steps t_j; needs a separable set and h zero or l1.
VectorXd prox_onto_diagonal(const Nonsmooth& h, const FeasibleSet& set, const VectorXd& v,
                            const VectorXd& t);

}  // namespace bsum
