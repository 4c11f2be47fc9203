#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "bsumkit/matrix_market.hpp"
#include "bsumkit/trace.hpp"

namespace bsum {

struct ExperimentCheck {
  std::string name;
  bool passed = false;
  std::string detail;
};

struct ExperimentReport {
  std::string name;
  std::vector<ExperimentCheck> checks;
  std::vector<std::string> table;  // free-form lines printed before the checks
  std::vector<std::pair<std::string, Trace>> traces;

  bool passed() const;
};

const std::vector<std::string>& experiment_names();

// Throws PreconditionError on an unknown name.
ExperimentReport run_experiment(std::string_view name, std::uint64_t seed = 0);

// The checks of the pathologies scenario for one fixture (ex2, ex4, ex5 or
// ex6 by full fixture name).
ExperimentReport pathology_experiment(std::string_view fixture, std::uint64_t seed = 0);

void print_report(const ExperimentReport& report, std::ostream& out);
// Writes <dir>/<trace name>.csv for every trace; returns the paths.
std::vector<std::filesystem::path> write_report_traces(const ExperimentReport& report,
                                                       const std::filesystem::path& dir);

// Seeded instances shared by the scenarios and the tests.
struct LassoInstance {
  Eigen::MatrixXd A;
  Eigen::VectorXd b;
  double lambda = 0.0;
};
LassoInstance make_lasso_instance(Eigen::Index rows, Eigen::Index cols, std::uint64_t seed);

// Exact rank-R tensor whose factor columns are strongly correlated, the
// regime where ALS shows long plateaus.
TensorData make_swamp_tensor(Eigen::Index dim, Eigen::Index R, std::uint64_t seed);

}  // namespace bsum
