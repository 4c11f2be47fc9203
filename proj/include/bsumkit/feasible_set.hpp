#pragma once

#include <random>
#include <string>

#include "bsumkit/block_vector.hpp"

namespace bsum {

enum class SetKind { unconstrained, box, nonneg_orthant, euclidean_ball, probability_simplex };

std::string to_string(SetKind kind);

class FeasibleSet {
 public:
  static FeasibleSet unconstrained(Index dim);
  static FeasibleSet box(VectorXd lo, VectorXd hi);
  static FeasibleSet box(Index dim, double lo, double hi);
  static FeasibleSet nonneg(Index dim);
  static FeasibleSet ball(Index dim, double radius);
  static FeasibleSet simplex(Index dim);

  SetKind kind() const { return kind_; }
  Index dim() const { return dim_; }
  double radius() const { return radius_; }
  // Per-entry bounds; meaningful for unconstrained, box and the orthant
  // (infinite where there is no bound).
  const VectorXd& lo() const { return lo_; }
  const VectorXd& hi() const { return hi_; }

  // True for the kinds whose projection acts entrywise.
  bool separable() const;
  bool bounded() const;

  bool contains(const VectorXd& v, double tol = 1e-12) const;
  VectorXd project(const VectorXd& v) const;
  double distance(const VectorXd& v) const { return (project(v) - v).norm(); }

  // A random feasible point near `center` with spread `scale`.
  VectorXd sample_near(const VectorXd& center, double scale, std::mt19937_64& rng) const;

 private:
  void check_dim(const VectorXd& v) const;

  SetKind kind_ = SetKind::unconstrained;
  Index dim_ = 0;
  double radius_ = 0.0;
  VectorXd lo_;
  VectorXd hi_;
};

VectorXd project(const FeasibleSet& set, const VectorXd& v);

}  // namespace bsum
