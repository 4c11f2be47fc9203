#pragma once

#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace bsum {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DimensionError : public Error {
 public:
  using Error::Error;
};

class UnsupportedOperation : public Error {
 public:
  using Error::Error;
};

class InfeasibleError : public Error {
 public:
  using Error::Error;
};

class PreconditionError : public Error {
 public:
  using Error::Error;
};

class DegenerateInstance : public Error {
 public:
  using Error::Error;
};

class DivergenceError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

// Thrown by iterative inner solvers; carries the best point seen so far.
class BudgetExceeded : public Error {
 public:
  BudgetExceeded(const std::string& what, Eigen::VectorXd best, double best_gap)
      : Error(what), best_(std::move(best)), best_gap_(best_gap) {}
  const Eigen::VectorXd& best_iterate() const { return best_; }
  double best_gap() const { return best_gap_; }

 private:
  Eigen::VectorXd best_;
  double best_gap_;
};

}  // namespace bsum
