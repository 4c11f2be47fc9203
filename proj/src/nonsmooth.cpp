#include "bsumkit/nonsmooth.hpp"

#include <cmath>

#include "bsumkit/errors.hpp"

namespace bsum {

VectorXd soft_threshold(const VectorXd& v, double t) {
  VectorXd out(v.size());
  for (Index j = 0; j < v.size(); ++j) {
    const double a = std::abs(v[j]);
    out[j] = a <= t ? 0.0 : std::copysign(a - t, v[j]);
  }
  return out;
}

Nonsmooth Nonsmooth::l1(double lambda) {
  if (!(lambda >= 0.0)) throw PreconditionError("l1 weight must be nonnegative");
  Nonsmooth h;
  h.kind_ = lambda == 0.0 ? Kind::zero : Kind::l1;
  h.lambda_ = lambda;
  return h;
}

Nonsmooth Nonsmooth::custom(ValueFn value, ProxFn prox) {
  if (!value) throw PreconditionError("custom nonsmooth term needs a value evaluator");
  Nonsmooth h;
  h.kind_ = Kind::custom;
  h.value_ = std::move(value);
  h.prox_ = std::move(prox);
  return h;
}

double Nonsmooth::value(const VectorXd& x) const {
  switch (kind_) {
    case Kind::zero: return 0.0;
    case Kind::l1: return lambda_ * x.lpNorm<1>();
    case Kind::custom: return value_(x);
  }
  return 0.0;
}

VectorXd Nonsmooth::prox(const VectorXd& v, double t) const {
  switch (kind_) {
    case Kind::zero: return v;
    case Kind::l1: return soft_threshold(v, t * lambda_);
    case Kind::custom:
      if (!prox_) throw UnsupportedOperation("custom nonsmooth term has no proximal map");
      return prox_(v, t);
  }
  return v;
}

bool prox_onto_available(const Nonsmooth& h, const FeasibleSet& set) {
  switch (h.kind()) {
    case Nonsmooth::Kind::zero: return true;
    case Nonsmooth::Kind::l1:
      // On the simplex the l1 term is the constant lambda.
      return set.separable() || set.kind() == SetKind::probability_simplex;
    case Nonsmooth::Kind::custom: return h.has_prox() && set.kind() == SetKind::unconstrained;
  }
  return false;
}

VectorXd prox_onto(const Nonsmooth& h, const FeasibleSet& set, const VectorXd& v, double t) {
  switch (h.kind()) {
    case Nonsmooth::Kind::zero: return set.project(v);
    case Nonsmooth::Kind::l1:
      if (set.kind() == SetKind::probability_simplex) return set.project(v);
      if (set.separable()) return set.project(soft_threshold(v, t * h.lambda()));
      break;
    case Nonsmooth::Kind::custom:
      if (set.kind() == SetKind::unconstrained) return h.prox(v, t);
      break;
  }
  throw UnsupportedOperation("no closed-form proximal map for this nonsmooth term over a " +
                             to_string(set.kind()) + " set");
}

VectorXd prox_onto_diagonal(const Nonsmooth& h, const FeasibleSet& set, const VectorXd& v,
                            const VectorXd& t) {
  if (!set.separable()) {
    throw UnsupportedOperation("diagonal proximal map needs a separable set, got " +
                               to_string(set.kind()));
  }
  if (h.kind() == Nonsmooth::Kind::zero) return set.project(v);
  if (h.kind() == Nonsmooth::Kind::l1) {
    VectorXd out(v.size());
    for (Index j = 0; j < v.size(); ++j) {
      const double a = std::abs(v[j]);
      const double tj = t[j] * h.lambda();
      out[j] = a <= tj ? 0.0 : std::copysign(a - tj, v[j]);
    }
    return set.project(out);
  }
  throw UnsupportedOperation("diagonal proximal map unavailable for custom nonsmooth terms");
}

}  // namespace bsum
