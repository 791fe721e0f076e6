#pragma once

#include <Eigen/Dense>
#include <filesystem>
#include <string>

#include "aosr/risk.hpp"

namespace testing {

/// Hypothesis that returns the same probability row for every input.
inline aosr::Hypothesis constant_hypothesis(const Eigen::RowVectorXd& probs) {
  return [probs](const Eigen::MatrixXd& x) {
    Eigen::MatrixXd out(x.rows(), probs.size());
    out.rowwise() = probs;
    return out;
  };
}

inline aosr::Hypothesis uniform_hypothesis(int k) {
  return constant_hypothesis(Eigen::RowVectorXd::Constant(k, 1.0 / k));
}

/// Fresh, empty directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("aosr_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace testing
