#include "bsumkit/solvers/irls.hpp"

#include <cmath>

#include "bsumkit/errors.hpp"

namespace bsum {

double irls_smoothed(const std::vector<IrlsTerm>& terms, double eta, const VectorXd& x) {
  double g = 0.0;
  for (const auto& t : terms) g += std::sqrt((t.A * x + t.b).squaredNorm() + eta * eta);
  return g;
}

double irls_bound(const std::vector<IrlsTerm>& terms, double eta, const VectorXd& x,
                  const VectorXd& anchor) {
  double u = 0.0;
  for (const auto& t : terms) {
    const double s = std::sqrt((t.A * anchor + t.b).squaredNorm() + eta * eta);
    u += 0.5 * (((t.A * x + t.b).squaredNorm() + eta * eta) / s + s);
  }
  return u;
}

std::vector<IrlsTerm> l1_row_terms(const MatrixXd& A, const VectorXd& b) {
  if (A.rows() != b.size()) throw DimensionError("row terms need as many targets as rows");
  std::vector<IrlsTerm> terms;
  for (Index k = 0; k < A.rows(); ++k) terms.push_back(IrlsTerm{A.row(k), VectorXd::Constant(1, b[k])});
  return terms;
}

namespace {

double quadratic_value(const std::optional<QuadraticTerm>& q, const VectorXd& x) {
  return q ? 0.5 * (q->C * x - q->d).squaredNorm() : 0.0;
}

}  // namespace

IrlsResult irls_solve(const std::vector<IrlsTerm>& terms, const StopCriteria& stop,
                      const IrlsOptions& options) {
  stop.validate();
  if (!(options.eta > 0.0)) throw PreconditionError("IRLS needs eta > 0");
  if (terms.empty()) throw PreconditionError("IRLS needs at least one term");
  const Index m = terms.front().A.cols();
  for (std::size_t j = 0; j < terms.size(); ++j) {
    if (terms[j].A.cols() != m || terms[j].A.rows() != terms[j].b.size()) {
      throw DimensionError("IRLS term " + std::to_string(j) + " has inconsistent dimensions");
    }
  }
  const auto& qt = options.quadratic;
  if (qt && (qt->C.cols() != m || qt->C.rows() != qt->d.size())) {
    throw DimensionError("quadratic term has inconsistent dimensions");
  }
  const Nonsmooth& h = options.h;
  const FeasibleSet free = FeasibleSet::unconstrained(m);
  if (!h.has_prox()) throw UnsupportedOperation("IRLS needs a proximal map for h");
  const double eta = options.eta;

  VectorXd x = options.x0 ? *options.x0 : VectorXd::Zero(m);
  if (x.size() != m) throw DimensionError("IRLS start point has the wrong length");
  auto objective = [&](const VectorXd& v) {
    return h.value(v) + quadratic_value(qt, v) + irls_smoothed(terms, eta, v);
  };
  auto smooth_gradient = [&](const VectorXd& v) {
    VectorXd g = VectorXd::Zero(m);
    for (const auto& t : terms) {
      const VectorXd r = t.A * v + t.b;
      g += t.A.transpose() * r / std::sqrt(r.squaredNorm() + eta * eta);
    }
    if (qt) g += qt->C.transpose() * (qt->C * v - qt->d);
    return g;
  };
  auto gap_at = [&](const VectorXd& v) { return (v - h.prox(v - smooth_gradient(v), 1.0)).norm(); };

  IrlsResult out;
  StopMonitor monitor(stop, 1, 1e-6);
  double f = objective(x);
  monitor.start(f);
  out.trace.records.push_back(TraceRecord{0, {0}, f, 0.0, gap_at(x), std::nullopt, std::nullopt});
  if (options.observer) options.observer(0, x);
  bool noted = false;

  for (std::size_t r = 1;; ++r) {
    // Weighted normal equations of the bound: M x = rhs.
    MatrixXd M = MatrixXd::Zero(m, m);
    VectorXd rhs = VectorXd::Zero(m);
    for (const auto& t : terms) {
      const double w = 1.0 / std::sqrt((t.A * x + t.b).squaredNorm() + eta * eta);
      M.noalias() += w * t.A.transpose() * t.A;
      rhs.noalias() -= w * t.A.transpose() * t.b;
    }
    if (qt) {
      M.noalias() += qt->C.transpose() * qt->C;
      rhs.noalias() += qt->C.transpose() * qt->d;
    }
    Eigen::LLT<MatrixXd> llt(M);
    const double scale = std::max(M.diagonal().maxCoeff(), 1e-300);
    bool singular = llt.info() != Eigen::Success;
    if (!singular) {
      const double piv = llt.matrixL().toDenseMatrix().diagonal().minCoeff();
      singular = piv * piv < 1e-14 * scale;
    }
    if (singular) {
      M.diagonal().array() += 1e-12 * scale;
      llt.compute(M);
      if (!noted) {
        out.trace.notes.push_back("weighted normal matrix singular at r=" + std::to_string(r) +
                                  "; added 1e-12 relative diagonal regularization");
        noted = true;
      }
    }
    VectorXd next;
    if (h.is_zero()) {
      next = llt.solve(rhs);
    } else {
      SmoothModel model;
      model.value = [&M, &rhs](const VectorXd& v) { return 0.5 * v.dot(M * v) - rhs.dot(v); };
      model.gradient = [&M, &rhs](const VectorXd& v) -> VectorXd { return M * v - rhs; };
      model.curvature_hint =
          Eigen::SelfAdjointEigenSolver<MatrixXd>(M, Eigen::EigenvaluesOnly).eigenvalues().maxCoeff();
      try {
        next = inner_prox_gradient(model, h, free, x, options.inner).x;
      } catch (const BudgetExceeded& e) {
        next = e.best_iterate();
        out.trace.notes.push_back("inner proximal solve hit its budget at r=" + std::to_string(r));
      }
    }
    const double step = (next - x).norm();
    x = next;
    f = objective(x);
    TraceRecord rec{r, {0}, f, step, gap_at(x), std::nullopt, std::nullopt};
    out.trace.records.push_back(rec);
    if (options.observer) options.observer(r, x);
    if (auto st = monitor.update(r, f, step, x.norm(), rec.stat_gap)) {
      out.trace.status = *st;
      break;
    }
  }
  out.x = x;
  return out;
}

}  // namespace bsum
