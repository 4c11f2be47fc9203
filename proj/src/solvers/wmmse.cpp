#include "bsumkit/solvers/wmmse.hpp"

#include <cmath>
#include <limits>
#include <random>
#include <sstream>

#include "bsumkit/errors.hpp"

namespace bsum {

void InterferenceChannel::validate() const {
  if (K < 1 || M < 1 || N < 1) throw PreconditionError("channel needs K, M, N >= 1");
  if (H.size() != static_cast<std::size_t>(K * K)) {
    throw DimensionError("channel map needs K*K = " + std::to_string(K * K) + " matrices, got " +
                         std::to_string(H.size()));
  }
  for (std::size_t p = 0; p < H.size(); ++p) {
    if (H[p].rows() != N || H[p].cols() != M) {
      throw DimensionError("channel " + std::to_string(p / K + 1) + "," + std::to_string(p % K + 1) +
                           " is not " + std::to_string(N) + "x" + std::to_string(M));
    }
  }
}

InterferenceChannel random_channel(Index K, Index M, Index N, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, std::sqrt(0.5));
  InterferenceChannel ch{K, M, N, {}};
  for (Index p = 0; p < K * K; ++p) {
    MatrixXcd h(N, M);
    for (Index q = 0; q < h.size(); ++q) {
      const double re = gauss(rng);
      h.data()[q] = std::complex<double>(re, gauss(rng));
    }
    ch.H.push_back(h);
  }
  return ch;
}

namespace {

// sum_{j in S} H_kj v_j v_j' H_kj' + sigma2 I, S = all j or all j != k.
MatrixXcd received_covariance(const InterferenceChannel& ch, const std::vector<VectorXcd>& v,
                              double sigma2, Index k, bool include_own) {
  MatrixXcd J = sigma2 * MatrixXcd::Identity(ch.N, ch.N);
  for (Index j = 0; j < ch.K; ++j) {
    if (j == k && !include_own) continue;
    const VectorXcd s = ch.at(k, j) * v[static_cast<std::size_t>(j)];
    J.noalias() += s * s.adjoint();
  }
  return J;
}

void check_beams(const InterferenceChannel& ch, const std::vector<VectorXcd>& v) {
  if (v.size() != static_cast<std::size_t>(ch.K)) throw DimensionError("need one transmit vector per user");
  for (const auto& vk : v) {
    if (vk.size() != ch.M) throw DimensionError("transmit vector has the wrong length");
  }
}

}  // namespace

VectorXd wmmse_mse(const InterferenceChannel& ch, const std::vector<VectorXcd>& u,
                   const std::vector<VectorXcd>& v, double sigma2) {
  VectorXd e(ch.K);
  for (Index k = 0; k < ch.K; ++k) {
    const auto& uk = u[static_cast<std::size_t>(k)];
    double ek = sigma2 * uk.squaredNorm();
    for (Index j = 0; j < ch.K; ++j) {
      const std::complex<double> g = uk.dot(ch.at(k, j) * v[static_cast<std::size_t>(j)]);
      ek += j == k ? std::norm(g - 1.0) : std::norm(g);
    }
    e[k] = ek;
  }
  return e;
}

std::vector<VectorXcd> mmse_receivers(const InterferenceChannel& ch, const std::vector<VectorXcd>& v,
                                      double sigma2) {
  std::vector<VectorXcd> u;
  for (Index k = 0; k < ch.K; ++k) {
    const MatrixXcd J = received_covariance(ch, v, sigma2, k, true);
    u.push_back(J.ldlt().solve(ch.at(k, k) * v[static_cast<std::size_t>(k)]));
  }
  return u;
}

VectorXd wmmse_rates(const InterferenceChannel& ch, const std::vector<VectorXcd>& v, double sigma2) {
  VectorXd R(ch.K);
  for (Index k = 0; k < ch.K; ++k) {
    const MatrixXcd J = received_covariance(ch, v, sigma2, k, false);
    const VectorXcd s = ch.at(k, k) * v[static_cast<std::size_t>(k)];
    const double sinr = std::max(0.0, s.dot(J.ldlt().solve(s)).real());
    R[k] = std::log1p(sinr);
  }
  return R;
}

VectorXcd solve_power_constrained(const MatrixXcd& A, const VectorXcd& b, double P, double power_tol) {
  if (!(P > 0.0)) throw PreconditionError("power budget must be positive");
  if (A.rows() != A.cols() || A.rows() != b.size()) throw DimensionError("power-constrained solve shapes");
  if (b.squaredNorm() == 0.0) return VectorXcd::Zero(b.size());
  Eigen::SelfAdjointEigenSolver<MatrixXcd> eig(A);
  const VectorXd lam = eig.eigenvalues().cwiseMax(0.0);
  const VectorXcd c = eig.eigenvectors().adjoint() * b;
  const VectorXd c2 = c.cwiseAbs2();
  const double top = std::max(lam.maxCoeff(), 1.0);
  auto power = [&](double mu) {
    double p = 0.0;
    for (Index i = 0; i < lam.size(); ++i) {
      const double d = lam[i] + mu;
      if (d <= 0.0) {
        if (c2[i] > 0.0) return std::numeric_limits<double>::infinity();
        continue;
      }
      p += c2[i] / (d * d);
    }
    return p;
  };
  auto solution = [&](double mu) {
    VectorXcd y(c.size());
    for (Index i = 0; i < c.size(); ++i) {
      const double d = lam[i] + mu;
      y[i] = d > 0.0 ? c[i] / d : std::complex<double>(0.0, 0.0);
    }
    return VectorXcd(eig.eigenvectors() * y);
  };
  // Treat negligible eigenvalues with a negligible component as null space.
  const double p0 = power(0.0);
  if (std::isfinite(p0) && p0 <= P) return solution(0.0);

  double hi = 1e-12 * top;
  int grow = 0;
  while (!(power(hi) <= P)) {
    hi *= 2.0;
    if (++grow > 400) {
      std::ostringstream msg;
      msg << "power bisection failed to bracket: P=" << P << ", mu_max=" << hi
          << ", power(mu_max)=" << power(hi) << ", ||b||=" << b.norm();
      throw DivergenceError(msg.str());
    }
  }
  double lo = grow == 0 ? 0.0 : hi / 2.0;
  for (int it = 0; it < 500; ++it) {
    const double ph = power(hi);
    if (P - ph <= power_tol) break;
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if (power(mid) <= P) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  // hi keeps the power at or below P.
  return solution(hi);
}

WmmseResult wmmse_design(const InterferenceChannel& ch, const VectorXd& P, double sigma2,
                         const StopCriteria& stop, const WmmseOptions& options) {
  ch.validate();
  stop.validate();
  if (!(sigma2 > 0.0)) throw PreconditionError("noise power must be positive");
  if (P.size() != ch.K || !(P.minCoeff() > 0.0)) throw PreconditionError("need a positive power budget per user");

  std::vector<VectorXcd> v;
  if (options.v0) {
    v = *options.v0;
    check_beams(ch, v);
    for (Index k = 0; k < ch.K; ++k) {
      if (v[static_cast<std::size_t>(k)].squaredNorm() > P[k] + 1e-9) {
        throw PreconditionError("initial transmit vector " + std::to_string(k + 1) + " exceeds its power budget");
      }
    }
  } else {
    std::mt19937_64 rng(options.seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    for (Index k = 0; k < ch.K; ++k) {
      VectorXcd g(ch.M);
      for (Index q = 0; q < ch.M; ++q) {
        const double re = gauss(rng);
        g[q] = std::complex<double>(re, gauss(rng));
      }
      v.push_back(std::sqrt(P[k]) * g / g.norm());
    }
  }
  std::vector<VectorXcd> u = mmse_receivers(ch, v, sigma2);

  auto objective = [&]() { return wmmse_mse(ch, u, v, sigma2).array().log().sum(); };
  auto snapshot = [&]() {
    Beamformers b{v, u, wmmse_rates(ch, v, sigma2), VectorXd(ch.K)};
    for (Index k = 0; k < ch.K; ++k) b.powers[k] = v[static_cast<std::size_t>(k)].squaredNorm();
    return b;
  };

  WmmseResult out;
  double f = objective();
  out.trace.records.push_back(TraceRecord{0, {}, f, 0.0, std::nullopt, std::nullopt, std::nullopt});
  if (options.observer) options.observer(0, snapshot());
  StopMonitor clock(stop, 1, 1e-6);
  clock.start(f);
  double rate = wmmse_rates(ch, v, sigma2).sum();
  std::size_t r = 0;

  for (std::size_t sweep = 1;; ++sweep) {
    // v-block: weights 1/e_k at the current point linearize the logs.
    {
      const VectorXd w = wmmse_mse(ch, u, v, sigma2).cwiseInverse();
      std::vector<VectorXcd> next;
      double step_sq = 0.0;
      for (Index k = 0; k < ch.K; ++k) {
        MatrixXcd A = MatrixXcd::Zero(ch.M, ch.M);
        for (Index j = 0; j < ch.K; ++j) {
          const VectorXcd t = ch.at(j, k).adjoint() * u[static_cast<std::size_t>(j)];
          A.noalias() += w[j] * t * t.adjoint();
        }
        const VectorXcd b = w[k] * (ch.at(k, k).adjoint() * u[static_cast<std::size_t>(k)]);
        next.push_back(solve_power_constrained(A, b, P[k], options.power_tol));
        step_sq += (next.back() - v[static_cast<std::size_t>(k)]).squaredNorm();
      }
      v = std::move(next);
      f = objective();
      out.trace.records.push_back(TraceRecord{++r, {1}, f, std::sqrt(step_sq), std::nullopt, std::nullopt, std::nullopt});
      if (options.observer) options.observer(r, snapshot());
    }
    // u-block: per-user MMSE receivers (the weights do not change the argmin).
    {
      const std::vector<VectorXcd> next = mmse_receivers(ch, v, sigma2);
      double step_sq = 0.0;
      for (Index k = 0; k < ch.K; ++k) {
        step_sq += (next[static_cast<std::size_t>(k)] - u[static_cast<std::size_t>(k)]).squaredNorm();
      }
      u = next;
      f = objective();
      out.trace.records.push_back(TraceRecord{++r, {0}, f, std::sqrt(step_sq), std::nullopt, std::nullopt, std::nullopt});
      if (options.observer) options.observer(r, snapshot());
    }
    const double new_rate = wmmse_rates(ch, v, sigma2).sum();
    const double change = std::abs(new_rate - rate);
    rate = new_rate;
    if (change < options.rate_tol) {
      out.trace.status = TerminalStatus::converged;
      break;
    }
    if (auto st = clock.check_wall_clock()) {
      out.trace.status = *st;
      break;
    }
    if (sweep >= stop.max_iters) {
      out.trace.status = TerminalStatus::max_iters;
      break;
    }
  }
  out.beamformers = snapshot();
  return out;
}

}  // namespace bsum
