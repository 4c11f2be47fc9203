#include "bsumkit/solvers/cp.hpp"

#include <cmath>
#include <memory>
#include <random>

#include "bsumkit/errors.hpp"

namespace bsum {

namespace {

using ConstMap = Eigen::Map<const MatrixXd>;

struct Shape {
  Index I, J, K, R;
  Index rows(Index i) const { return i == 0 ? I : (i == 1 ? J : K); }
};

ConstMap factor_of(const BlockVector& x, const Shape& s, Index i) {
  return ConstMap(x.block(i).data(), s.rows(i), s.R);
}

void check_tensor(const TensorData& X) {
  for (Index d : X.dims) {
    if (d <= 0) throw PreconditionError("tensor is empty");
  }
  if (X.unfolding.rows() != X.dims[0] || X.unfolding.cols() != X.dims[1] * X.dims[2]) {
    throw DimensionError("tensor unfolding does not match its dims");
  }
}

// Khatri-Rao partner of factor i, matching tensor_unfold(X, i).
MatrixXd partner(const BlockVector& x, const Shape& s, Index i) {
  if (i == 0) return khatri_rao(factor_of(x, s, 2), factor_of(x, s, 1));
  if (i == 1) return khatri_rao(factor_of(x, s, 2), factor_of(x, s, 0));
  return khatri_rao(factor_of(x, s, 1), factor_of(x, s, 0));
}

MatrixXd gram_product(const BlockVector& x, const Shape& s, Index i) {
  MatrixXd G = MatrixXd::Ones(s.R, s.R);
  for (Index j = 0; j < 3; ++j) {
    if (j == i) continue;
    const auto F = factor_of(x, s, j);
    G.array() *= (F.transpose() * F).array();
  }
  return G;
}

struct Unfoldings {
  MatrixXd m[3];
  double norm_sq = 0.0;
};

}  // namespace

MatrixXd khatri_rao(const MatrixXd& U, const MatrixXd& V) {
  if (U.cols() != V.cols()) throw DimensionError("Khatri-Rao factors need the same column count");
  MatrixXd out(U.rows() * V.rows(), U.cols());
  for (Index r = 0; r < U.cols(); ++r) {
    for (Index q = 0; q < U.rows(); ++q) out.col(r).segment(q * V.rows(), V.rows()) = U(q, r) * V.col(r);
  }
  return out;
}

MatrixXd tensor_unfold(const TensorData& X, int mode) {
  check_tensor(X);
  const Index I = X.dims[0], J = X.dims[1], K = X.dims[2];
  if (mode == 0) return X.unfolding;
  const auto at = [&](Index i, Index j, Index k) { return X.unfolding(i, j + J * k); };
  if (mode == 1) {
    MatrixXd out(J, I * K);
    for (Index k = 0; k < K; ++k)
      for (Index i = 0; i < I; ++i)
        for (Index j = 0; j < J; ++j) out(j, i + I * k) = at(i, j, k);
    return out;
  }
  if (mode == 2) {
    MatrixXd out(K, I * J);
    for (Index j = 0; j < J; ++j)
      for (Index i = 0; i < I; ++i)
        for (Index k = 0; k < K; ++k) out(k, i + I * j) = at(i, j, k);
    return out;
  }
  throw PreconditionError("tensor mode must be 0, 1 or 2");
}

TensorData tensor_from_factors(const MatrixXd& A, const MatrixXd& B, const MatrixXd& C) {
  if (A.cols() != B.cols() || A.cols() != C.cols()) throw DimensionError("factor matrices need the same rank");
  TensorData X;
  X.dims = {A.rows(), B.rows(), C.rows()};
  X.unfolding = A * khatri_rao(C, B).transpose();
  return X;
}

BlockVector cp_pack(const CpFactors& f) {
  const Index na = f.A.size(), nb = f.B.size(), nc = f.C.size();
  VectorXd flat(na + nb + nc);
  flat.segment(0, na) = Eigen::Map<const VectorXd>(f.A.data(), na);
  flat.segment(na, nb) = Eigen::Map<const VectorXd>(f.B.data(), nb);
  flat.segment(na + nb, nc) = Eigen::Map<const VectorXd>(f.C.data(), nc);
  return BlockVector({na, nb, nc}, flat);
}

CpFactors cp_unpack(const BlockVector& x, Index I, Index J, Index K, Index R) {
  const Shape s{I, J, K, R};
  return CpFactors{factor_of(x, s, 0), factor_of(x, s, 1), factor_of(x, s, 2), 0.0};
}

double cp_fit(const TensorData& X, const CpFactors& f) {
  const double resid = (X.unfolding - f.A * khatri_rao(f.C, f.B).transpose()).norm();
  return 1.0 - resid / X.unfolding.norm();
}

CpFactors cp_default_init(Index I, Index J, Index K, Index R, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  CpFactors f{MatrixXd(I, R), MatrixXd(J, R), MatrixXd(K, R), 0.0};
  for (MatrixXd* m : {&f.A, &f.B, &f.C}) {
    for (Index k = 0; k < m->size(); ++k) m->data()[k] = gauss(rng);
  }
  return f;
}

Problem make_cp_problem(const TensorData& X, Index R, std::shared_ptr<std::vector<std::string>> notes) {
  check_tensor(X);
  if (R < 1) throw PreconditionError("CP rank must be at least 1");
  const Shape s{X.dims[0], X.dims[1], X.dims[2], R};
  auto U = std::make_shared<Unfoldings>();
  for (int m = 0; m < 3; ++m) U->m[m] = tensor_unfold(X, m);
  U->norm_sq = X.unfolding.squaredNorm();

  Problem p = make_problem("cp", {s.I * R, s.J * R, s.K * R});
  p.smooth = [U, s](const BlockVector& x) {
    return (U->m[0] - factor_of(x, s, 0) * partner(x, s, 0).transpose()).squaredNorm();
  };
  p.gradient = [U, s](const BlockVector& x, Index i) -> VectorXd {
    const MatrixXd G = 2.0 * (factor_of(x, s, i) * gram_product(x, s, i) -
                              U->m[i] * partner(x, s, i));
    return Eigen::Map<const VectorXd>(G.data(), G.size());
  };
  p.block_solver = [U, s, notes](const BlockVector& z, Index i, double gamma) -> VectorXd {
    // F (2G + gamma I) = 2 X_(i) KR + gamma Z, solved on the transposed system.
    MatrixXd lhs = 2.0 * gram_product(z, s, i);
    lhs.diagonal().array() += gamma;
    MatrixXd rhs = 2.0 * (U->m[i] * partner(z, s, i)) + gamma * MatrixXd(factor_of(z, s, i));
    Eigen::LLT<MatrixXd> llt(lhs);
    const double scale = std::max(lhs.diagonal().maxCoeff(), 1e-300);
    bool deficient = llt.info() != Eigen::Success;
    if (!deficient) {
      const double piv = llt.matrixL().toDenseMatrix().diagonal().minCoeff();
      deficient = piv * piv < 1e-13 * scale;
    }
    if (deficient) {
      lhs.diagonal().array() += 1e-10 * scale;
      llt.compute(lhs);
      if (notes) {
        notes->push_back("rank-deficient normal matrix for factor " + std::to_string(i + 1) +
                         "; solved with a 1e-10 relative ridge");
      }
    }
    const MatrixXd F = llt.solve(rhs.transpose()).transpose();
    return Eigen::Map<const VectorXd>(F.data(), F.size());
  };
  return p;
}

CpResult cp_decompose(const TensorData& X, Index R, const StopCriteria& stop, const CpOptions& options) {
  check_tensor(X);
  if (R < 1) throw PreconditionError("CP rank must be at least 1");
  stop.validate();
  const Index I = X.dims[0], J = X.dims[1], K = X.dims[2];
  CpFactors init = options.init ? *options.init : cp_default_init(I, J, K, R, options.seed);
  if (init.A.rows() != I || init.B.rows() != J || init.C.rows() != K || init.A.cols() != R ||
      init.B.cols() != R || init.C.cols() != R) {
    throw DimensionError("CP initial factors have the wrong shape");
  }
  if (options.mode != CpMode::plain_als && !(options.gamma > 0.0)) {
    throw PreconditionError("proximal CP modes need gamma > 0");
  }

  auto notes = std::make_shared<std::vector<std::string>>();
  const Problem p = make_cp_problem(X, R, notes);
  StopCriteria sweeps = stop;
  sweeps.max_iters = stop.max_iters * 3;
  EngineOptions eng = options.engine;
  Surrogate s = Surrogate::exact();
  if (options.mode == CpMode::proximal_als) s = Surrogate::proximal(options.gamma);
  if (options.mode == CpMode::diminishing_proximal) {
    s = Surrogate::proximal(options.gamma);
    const double g0 = options.gamma;
    auto user = options.engine.surrogate_schedule;
    eng.surrogate_schedule = [g0, user](std::size_t r, std::vector<Surrogate>& surr) {
      const double sweep = static_cast<double>((r - 1) / 3);
      for (auto& v : surr) v = Surrogate::proximal(g0 / (sweep + 1.0));
      if (user) user(r, surr);
    };
  }
  auto run = run_bsum(p, {s}, SelectionRule::cyclic(3), sweeps, cp_pack(init), eng);
  if (!notes->empty()) {
    run.trace.notes.push_back(notes->front());
    if (notes->size() > 1) {
      run.trace.notes.push_back("regularized solves: " + std::to_string(notes->size()));
    }
  }
  CpResult out{cp_unpack(run.x, I, J, K, R), std::move(run.trace)};
  out.factors.fit = cp_fit(X, out.factors);
  return out;
}

}  // namespace bsum
