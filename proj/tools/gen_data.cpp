// Regenerates the bundled instances under data/.
#include <filesystem>
#include <iostream>
#include <random>

#include "bsumkit/experiments.hpp"
#include "bsumkit/matrix_market.hpp"
#include "bsumkit/solvers/cp.hpp"

int main(int argc, char** argv) {
  namespace fs = std::filesystem;
  const fs::path dir = argc > 1 ? fs::path(argv[1]) : fs::path("data");
  fs::create_directories(dir);
  std::mt19937_64 rng(2024);
  std::normal_distribution<double> g(0.0, 1.0);
  std::uniform_real_distribution<double> u(0.0, 1.0);

  const auto lasso = bsum::make_lasso_instance(30, 60, 7);
  bsum::write_matrix_market(dir / "lasso_A.mtx", lasso.A);
  bsum::write_matrix_market(dir / "lasso_b.mtx", Eigen::MatrixXd(lasso.b));

  Eigen::MatrixXd W(20, 3), H(3, 15);
  for (Eigen::Index k = 0; k < W.size(); ++k) W.data()[k] = u(rng);
  for (Eigen::Index k = 0; k < H.size(); ++k) H.data()[k] = u(rng);
  Eigen::MatrixXd V = W * H;
  for (Eigen::Index k = 0; k < V.size(); ++k) V.data()[k] += 0.01 * u(rng);
  bsum::write_matrix_market(dir / "nmf_V.mtx", V);

  Eigen::MatrixXd A(8, 2), B(7, 2), C(6, 2);
  for (auto* m : {&A, &B, &C}) {
    for (Eigen::Index k = 0; k < m->size(); ++k) m->data()[k] = g(rng);
  }
  bsum::write_tensor(dir / "cp_X.tns", bsum::tensor_from_factors(A, B, C));

  // Reads drawn from abundances (0.7, 0.3) over two overlapping candidates.
  Eigen::MatrixXd alpha(200, 2);
  for (Eigen::Index n = 0; n < alpha.rows(); ++n) {
    const bool first = u(rng) < 0.7;
    alpha(n, 0) = first ? 1.0 : 0.2 * u(rng);
    alpha(n, 1) = first ? 0.2 * u(rng) : 1.0;
  }
  bsum::write_matrix_market(dir / "em_alpha.mtx", alpha);

  Eigen::MatrixXd P(40, 5);
  for (Eigen::Index k = 0; k < P.size(); ++k) P.data()[k] = g(rng);
  Eigen::VectorXd xt(5);
  for (Eigen::Index k = 0; k < 5; ++k) xt[k] = g(rng);
  Eigen::VectorXd y = P * xt;
  for (Eigen::Index k = 0; k < y.size(); ++k) y[k] += 1e-3 * g(rng);
  bsum::write_matrix_market(dir / "ssum_A.mtx", P);
  bsum::write_matrix_market(dir / "ssum_b.mtx", Eigen::MatrixXd(y));
  std::cout << "wrote instances to " << dir.string() << "\n";
}
