#pragma once

#include <Eigen/Dense>
#include <vector>

#include "aosr/rng.hpp"

namespace aosr {

struct IsolationNode {
  int split_dim = -1;  ///< -1 marks a leaf
  double split_value = 0.0;
  int left = -1;  ///< samples with x[split_dim] < split_value
  int right = -1;
  int size = 0;  ///< training samples that reached this node
  int depth = 0;

  bool is_leaf() const noexcept { return split_dim < 0; }
};

struct IsolationTree {
  std::vector<IsolationNode> nodes;  ///< nodes[0] is the root

  int depth() const;
  /// Depth of the reached leaf plus the average-path correction for its size.
  double path_length(const Eigen::Ref<const Eigen::RowVectorXd>& x) const;
};

struct IforestModel {
  std::vector<IsolationTree> trees;
  int subsample = 0;  ///< effective psi (capped at the reference size)
  Eigen::Index dim = 0;

  int depth_limit() const;
};

/// Average unsuccessful-search path length of a binary search tree with k keys.
double average_path_length(double k);

IforestModel iforest_fit(const Eigen::MatrixXd& reference, int num_trees, int subsample, Rng& rng);

/// 2^(-E[h(x)] / c(psi)); 0.5 everywhere when psi = 1 (no normalizer).
Eigen::VectorXd iforest_anomaly_score(const IforestModel& model, const Eigen::MatrixXd& x);

/// 1 - anomaly score: high for points that look like the reference set.
Eigen::VectorXd weights_from_iforest(const IforestModel& model, const Eigen::MatrixXd& x);

}  // namespace aosr
