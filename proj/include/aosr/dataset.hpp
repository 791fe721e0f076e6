#pragma once

#include <Eigen/Dense>
#include <vector>

#include "aosr/rng.hpp"

namespace aosr {

/// Labelled feature matrix. Labels live in {0..C}; C marks the unknown class
/// and only appears in evaluation data.
class Dataset {
 public:
  Dataset(Eigen::MatrixXd features, std::vector<int> labels, int num_known_classes);

  const Eigen::MatrixXd& features() const noexcept { return features_; }
  const std::vector<int>& labels() const noexcept { return labels_; }
  int num_known_classes() const noexcept { return num_known_classes_; }
  Eigen::Index size() const noexcept { return features_.rows(); }
  Eigen::Index dim() const noexcept { return features_.cols(); }

  /// True when no sample carries the unknown label.
  bool is_training() const;

  bool operator==(const Dataset& other) const;

 private:
  Eigen::MatrixXd features_;
  std::vector<int> labels_;
  int num_known_classes_;
};

/// Unlabelled sample matrix (one row per sample), nonempty and finite.
class FeatureMatrix {
 public:
  explicit FeatureMatrix(Eigen::MatrixXd values);

  const Eigen::MatrixXd& values() const noexcept { return values_; }
  Eigen::Index size() const noexcept { return values_.rows(); }
  Eigen::Index dim() const noexcept { return values_.cols(); }

 private:
  Eigen::MatrixXd values_;
};

struct Box {
  Eigen::VectorXd lower;
  Eigen::VectorXd upper;

  Box(Eigen::VectorXd lo, Eigen::VectorXd hi);

  Eigen::Index dim() const noexcept { return lower.size(); }
  bool contains(const Eigen::Ref<const Eigen::VectorXd>& x) const;
};

/// [-1.5, 2.5] x [-1.0, 1.5], the region unknown double-moon samples are drawn from.
Box default_unknown_box();
inline constexpr double kDefaultExclusionMargin = 0.2;

/// Distances from a 2-D point to the noiseless upper and lower moon arcs.
double distance_to_upper_moon(double x, double y);
double distance_to_lower_moon(double x, double y);

/// n/2 samples on each moon: class 0 on (cos t, sin t), class 1 on
/// (1 - cos t, 0.5 - sin t), t ~ U[0, pi], plus isotropic Gaussian noise.
Dataset gen_double_moon(Eigen::Index n, double noise, Rng& rng);

/// Uniform samples over `box` with points closer than `exclusion_margin` to
/// either moon centerline rejected. Throws infeasible_region after 1000 n draws.
FeatureMatrix gen_unknown_uniform(Eigen::Index n, const Box& box, double exclusion_margin, Rng& rng);

FeatureMatrix gen_gaussian_blob(Eigen::Index n, const Eigen::VectorXd& mean, double stddev, Rng& rng);

/// Per-dimension [min, max] widened by margin_fraction of the range on each side.
Box bounding_box(const Eigen::MatrixXd& features, double margin_fraction);

/// n rows uniform over the box.
FeatureMatrix sample_uniform_box(Eigen::Index n, const Box& box, Rng& rng);

}  // namespace aosr
