#pragma once

#include <array>
#include <filesystem>
#include <iosfwd>

#include <Eigen/Dense>

namespace bsum {

// Dense MatrixMarket "array" files, real or complex, column-major.
Eigen::MatrixXd read_matrix_market(std::istream& in);
Eigen::MatrixXd read_matrix_market(const std::filesystem::path& path);
Eigen::MatrixXcd read_matrix_market_complex(std::istream& in);
Eigen::MatrixXcd read_matrix_market_complex(const std::filesystem::path& path);

void write_matrix_market(std::ostream& out, const Eigen::MatrixXd& m);
void write_matrix_market(const std::filesystem::path& path, const Eigen::MatrixXd& m);
void write_matrix_market(std::ostream& out, const Eigen::MatrixXcd& m);
void write_matrix_market(const std::filesystem::path& path, const Eigen::MatrixXcd& m);

// Third-order tensor file: a `dims: d1 d2 d3` line, then the mode-1
// unfolding (d1 x d2*d3, column index j + d2*k) as a MatrixMarket array.
struct TensorData {
  std::array<Eigen::Index, 3> dims{0, 0, 0};
  Eigen::MatrixXd unfolding;
};

TensorData read_tensor(std::istream& in);
TensorData read_tensor(const std::filesystem::path& path);
void write_tensor(std::ostream& out, const TensorData& t);
void write_tensor(const std::filesystem::path& path, const TensorData& t);

}  // namespace bsum
