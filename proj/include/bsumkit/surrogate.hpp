#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "bsumkit/problem.hpp"

namespace bsum {

enum class SurrogateKind { exact, proximal, quadratic, linear, jensen };

std::string to_string(SurrogateKind kind);

struct InnerSolverBudget {
  int max_iters = 10000;
  double tolerance = 1e-8;
};

// Per-entry curvature that may depend on the anchor point z (diagonal Phi(z)).
using DiagonalCurvatureFn = std::function<VectorXd(const BlockVector&, Index)>;

class Surrogate {
 public:
  enum class QuadraticMode { scalar, estimated, matrix, diagonal };

  static Surrogate exact();
  static Surrogate proximal(double gamma);
  // Phi = L * I.
  static Surrogate quadratic(double lipschitz);
  // Phi = 1.01 * (power-iteration estimate of the block curvature at z) * I.
  static Surrogate quadratic_estimated(double safety = 1.01);
  static Surrogate quadratic_matrix(MatrixXd phi);
  static Surrogate quadratic_diagonal(DiagonalCurvatureFn curvature);
  static Surrogate linear();
  // Empty weights select w(j) = |a(j)| / ||a||_1 from the problem's Jensen data.
  static Surrogate jensen(VectorXd weights = {});

  SurrogateKind kind() const { return kind_; }
  double gamma() const { return gamma_; }
  QuadraticMode quadratic_mode() const { return qmode_; }
  double lipschitz() const { return lipschitz_; }
  double safety() const { return safety_; }
  const MatrixXd& phi() const { return *phi_; }
  const DiagonalCurvatureFn& curvature() const { return curvature_; }
  const VectorXd& jensen_weights() const { return weights_; }

  InnerSolverBudget budget;

  std::string describe() const;

 private:
  SurrogateKind kind_ = SurrogateKind::exact;
  double gamma_ = 0.0;
  QuadraticMode qmode_ = QuadraticMode::scalar;
  double lipschitz_ = 0.0;
  double safety_ = 1.01;
  std::shared_ptr<const MatrixXd> phi_;
  DiagonalCurvatureFn curvature_;
  VectorXd weights_;
};

// u_i(x_i, z) without the h_i term, with its gradient in x_i.
struct SmoothModel {
  std::function<double(const VectorXd&)> value;
  std::function<VectorXd(const VectorXd&)> gradient;
  double curvature_hint = 1.0;
};

// Available for exact/proximal (needs a gradient), quadratic and linear kinds.
SmoothModel surrogate_smooth_model(const Surrogate& s, const Problem& problem, Index i,
                                   const BlockVector& z);

// u_i(x_i, z) + h_i(x_i).
double surrogate_value(const Surrogate& s, const Problem& problem, Index i, const VectorXd& xi,
                       const BlockVector& z);

// A minimizer of u_i(., z) + h_i over X_i.
VectorXd minimize_block_surrogate(const Surrogate& s, const Problem& problem, Index i,
                                  const BlockVector& z);

// Largest eigenvalue of the block Hessian of g at z by power iteration on
// finite-difference Hessian-vector products.
double estimate_block_lipschitz(const Problem& problem, Index i, const BlockVector& z);

struct InnerResult {
  VectorXd x;
  double gap = 0.0;
  int iterations = 0;
};

// Proximal gradient with backtracking on phi + h over the set; stops when the
// unit-step prox residual is below the tolerance.
InnerResult inner_prox_gradient(const SmoothModel& model, const Nonsmooth& h,
                                const FeasibleSet& set, const VectorXd& x0,
                                const InnerSolverBudget& budget);

struct ValidationReport {
  double a1_max_abs_gap = 0.0;
  double a2_min_slack = 0.0;
  double a3_max_deriv_gap = 0.0;
  bool a1_pass = true;
  bool a2_pass = true;
  bool a3_pass = true;
  bool a3_implied = false;
  int sample_count = 0;
  std::optional<VectorXd> worst_a2_point;
  Index worst_a2_block = -1;

  bool passed() const { return a1_pass && a2_pass && a3_pass; }
};

struct ValidationOptions {
  double a1_tolerance = 1e-10;
  double a2_tolerance = 1e-9;
  double a3_tolerance = 1e-4;
  int a3_directions = 8;
};

// Checks tightness, the upper bound and first-order agreement of the given
// per-block surrogates at z. Violations are reported, not thrown.
ValidationReport validate_assumption_a(const std::vector<Surrogate>& surrogates,
                                       const Problem& problem, const BlockVector& z,
                                       int n_samples, std::uint64_t seed,
                                       const ValidationOptions& options = {});
ValidationReport validate_assumption_a(const Surrogate& s, const Problem& problem,
                                       const BlockVector& z, int n_samples, std::uint64_t seed,
                                       const ValidationOptions& options = {});

std::string format_report(const ValidationReport& report);

// One surrogate broadcast to every block, or one per block.
std::vector<Surrogate> per_block(const std::vector<Surrogate>& s, Index n);

}  // namespace bsum
