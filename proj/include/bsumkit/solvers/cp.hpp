#pragma once

#include <cstdint>
#include <optional>

#include "bsumkit/engine.hpp"
#include "bsumkit/matrix_market.hpp"

namespace bsum {

struct CpFactors {
  MatrixXd A;  // I x R
  MatrixXd B;  // J x R
  MatrixXd C;  // K x R
  double fit = 0.0;
};

enum class CpMode { plain_als, proximal_als, diminishing_proximal };

struct CpOptions {
  CpMode mode = CpMode::plain_als;
  // proximal_als: fixed gamma; diminishing_proximal: gamma0, then gamma0/(s+1)
  // at sweep s = 0, 1, ...
  double gamma = 1.0;
  std::optional<CpFactors> init;
  std::uint64_t seed = 0;
  EngineOptions engine;
};

struct CpResult {
  CpFactors factors;
  Trace trace;
};

// Unfolding along mode 0, 1 or 2. Column index: j + J*k, i + I*k, i + I*j.
MatrixXd tensor_unfold(const TensorData& X, int mode);
TensorData tensor_from_factors(const MatrixXd& A, const MatrixXd& B, const MatrixXd& C);

// Column-wise Kronecker product: row p + P*q holds U(q, r) * V(p, r).
MatrixXd khatri_rao(const MatrixXd& U, const MatrixXd& V);

// Blocks 0, 1, 2 = A, B, C (column-major). f = ||X - [[A, B, C]]||_F^2.
// block_solver(z, i, gamma) solves the normal equations of the block least
// squares plus gamma/2 ||. - z_i||^2; a rank-deficient system at gamma = 0 gets
// a small ridge and a note in *notes.
Problem make_cp_problem(const TensorData& X, Index R,
                        std::shared_ptr<std::vector<std::string>> notes = nullptr);

BlockVector cp_pack(const CpFactors& f);
CpFactors cp_unpack(const BlockVector& x, Index I, Index J, Index K, Index R);
double cp_fit(const TensorData& X, const CpFactors& f);
CpFactors cp_default_init(Index I, Index J, Index K, Index R, std::uint64_t seed);

// stop.max_iters counts ALS sweeps (three block updates each); the trace has
// one record per block update.
CpResult cp_decompose(const TensorData& X, Index R, const StopCriteria& stop,
                      const CpOptions& options = {});

}  // namespace bsum
