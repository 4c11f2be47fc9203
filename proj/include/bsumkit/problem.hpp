#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "bsumkit/block_vector.hpp"
#include "bsumkit/feasible_set.hpp"
#include "bsumkit/nonsmooth.hpp"

namespace bsum {

// Linear coupling sum_i A_i x_i = b.
struct Coupling {
  std::vector<MatrixXd> A;
  VectorXd b;
};

struct KnownOptimum {
  double value = 0.0;
  std::string provenance;
};

// Structure used by the Jensen bound: g(x) = F(a_1'x_1, ..., a_n'x_n).
struct JensenStructure {
  std::vector<VectorXd> coefficients;
  std::function<double(const VectorXd&)> outer;
};

using SmoothValueFn = std::function<double(const BlockVector&)>;
using BlockGradientFn = std::function<VectorXd(const BlockVector&, Index)>;
// argmin over X_i of f(y, z_{-i}) + gamma/2 ||y - z_i||^2 (gamma = 0: exact block step).
using BlockSolverFn = std::function<VectorXd(const BlockVector&, Index, double)>;

struct Problem {
  std::string name;
  std::vector<Index> dims;
  SmoothValueFn smooth;
  BlockGradientFn gradient;
  std::vector<Nonsmooth> nonsmooth;
  std::vector<FeasibleSet> sets;
  std::optional<Coupling> coupling;
  BlockSolverFn block_solver;
  std::optional<JensenStructure> jensen;
  std::optional<KnownOptimum> known_optimum;

  Index num_blocks() const { return static_cast<Index>(dims.size()); }
  bool has_gradient() const { return static_cast<bool>(gradient); }
  bool has_nonsmooth() const;
  // Smooth part with gradient plus terms whose prox over X_i is closed form.
  bool composite_smooth() const;

  void validate() const;
  void check_point(const BlockVector& x) const;
  bool is_feasible(const BlockVector& x, double tol = 1e-10) const;
  BlockVector project(const BlockVector& x) const;
  BlockVector zeros() const { return BlockVector(dims); }
};

// Problem with n blocks, no smooth part, unconstrained sets and zero h.
Problem make_problem(std::string name, std::vector<Index> dims);

double eval_objective(const Problem& problem, const BlockVector& x);
double eval_smooth(const Problem& problem, const BlockVector& x);
VectorXd eval_block_gradient(const Problem& problem, Index i, const BlockVector& x);
VectorXd eval_gradient(const Problem& problem, const BlockVector& x);

const std::vector<double>& default_derivative_ladder();

// One-sided derivative of phi at 0 from quotients (phi(l) - phi(0))/l over a
// decreasing ladder, Richardson-extrapolated pairwise; the minimum stands in
// for the liminf. Non-finite phi at the smallest step is an error.
double directional_derivative_1d(const std::function<double(double)>& phi,
                                 const std::vector<double>& ladder = default_derivative_ladder());

// Directional derivative of f at x along the flat direction d.
double directional_derivative(const Problem& problem, const BlockVector& x, const VectorXd& d,
                              const std::vector<double>& ladder = default_derivative_ladder());

// Replace the coupling by per-block slice moves: block i may only move inside
// {y in X_i : A_i y + sum_{j != i} A_j z_j = b}. Needs every A_i with full
// column rank, in which case the slice is a single point.
Problem coupled_slice_view(const Problem& problem);

}  // namespace bsum
