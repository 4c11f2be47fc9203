#pragma once

#include <initializer_list>
#include <random>

#include <Eigen/Dense>

namespace testutil {

inline Eigen::VectorXd vec(std::initializer_list<double> v) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index k = 0;
  for (double e : v) out[k++] = e;
  return out;
}

inline Eigen::MatrixXd gaussian(Eigen::Index rows, Eigen::Index cols, std::mt19937_64& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index k = 0; k < m.size(); ++k) m.data()[k] = g(rng);
  return m;
}

inline Eigen::VectorXd gaussian(Eigen::Index n, std::mt19937_64& rng) {
  return gaussian(n, 1, rng).col(0);
}

}  // namespace testutil
