#pragma once

#include <complex>
#include <cstdint>
#include <optional>
#include <vector>

#include "bsumkit/engine.hpp"

namespace bsum {

using Eigen::MatrixXcd;
using Eigen::VectorXcd;

// H[k*K + j] is the N x M channel from transmitter j to receiver k.
struct InterferenceChannel {
  Index K = 0;
  Index M = 0;  // transmit antennas
  Index N = 0;  // receive antennas
  std::vector<MatrixXcd> H;

  const MatrixXcd& at(Index k, Index j) const { return H[static_cast<std::size_t>(k * K + j)]; }
  void validate() const;
};

struct Beamformers {
  std::vector<VectorXcd> v;  // K transmit vectors, length M
  std::vector<VectorXcd> u;  // K receive vectors, length N
  VectorXd rates;            // natural log
  VectorXd powers;
};

struct WmmseOptions {
  std::optional<std::vector<VectorXcd>> v0;
  std::uint64_t seed = 0;
  // Stop when the sum rate changes by less than this over one sweep.
  double rate_tol = 1e-6;
  double power_tol = 1e-10;
  std::function<void(std::size_t, const Beamformers&)> observer;
};

struct WmmseResult {
  Beamformers beamformers;
  Trace trace;
};

// Entries i.i.d. circular complex Gaussian with unit variance.
InterferenceChannel random_channel(Index K, Index M, Index N, std::uint64_t seed);

// e_k = |u_k' H_kk v_k - 1|^2 + sum_{j != k} |u_k' H_kj v_j|^2 + sigma2 ||u_k||^2
VectorXd wmmse_mse(const InterferenceChannel& ch, const std::vector<VectorXcd>& u,
                   const std::vector<VectorXcd>& v, double sigma2);
// log(1 + SINR_k) with the MMSE receiver.
VectorXd wmmse_rates(const InterferenceChannel& ch, const std::vector<VectorXcd>& v, double sigma2);
std::vector<VectorXcd> mmse_receivers(const InterferenceChannel& ch, const std::vector<VectorXcd>& v,
                                      double sigma2);

// argmin v'Av - 2 Re(b'v) subject to ||v||^2 <= P for Hermitian PSD A; the
// multiplier is found by bisection to power_tol.
VectorXcd solve_power_constrained(const MatrixXcd& A, const VectorXcd& b, double P,
                                  double power_tol = 1e-10);

// One sweep = v-block then u-block; stop.max_iters counts sweeps and the trace
// holds one record per block update with f = sum_k log e_k.
WmmseResult wmmse_design(const InterferenceChannel& ch, const VectorXd& P, double sigma2,
                         const StopCriteria& stop, const WmmseOptions& options = {});

}  // namespace bsum
