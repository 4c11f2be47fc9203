#pragma once

#include <cstdint>
#include <optional>

#include "bsumkit/engine.hpp"

namespace bsum {

struct NmfFactors {
  MatrixXd W;  // M x K
  MatrixXd H;  // K x N
};

struct NmfOptions {
  std::optional<NmfFactors> init;
  std::uint64_t seed = 0;
  double epsilon = 1e-12;
  EngineOptions engine;
};

struct NmfResult {
  NmfFactors factors;
  Trace trace;
};

// Blocks: 0 = H (column-major K x N), 1 = W (column-major M x K).
Problem make_nmf_problem(const MatrixXd& V, Index K);
BlockVector nmf_pack(const NmfFactors& f);
NmfFactors nmf_unpack(const BlockVector& x, Index M, Index K, Index N);

// Diagonal curvature (W'WH + eps)/H for block 0 and (WHH' + eps)/W for block
// 1; its surrogate minimizer is the guarded multiplicative update.
Surrogate nmf_surrogate(const MatrixXd& V, Index K, double epsilon = 1e-12);

NmfFactors nmf_default_init(Index M, Index N, Index K, std::uint64_t seed);

NmfResult nmf_factorize(const MatrixXd& V, Index K, const StopCriteria& stop,
                        const NmfOptions& options = {});

double nmf_objective(const MatrixXd& V, const NmfFactors& f);

}  // namespace bsum
