#include "aosr/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "aosr/error.hpp"

namespace aosr {

Dataset::Dataset(Eigen::MatrixXd features, std::vector<int> labels, int num_known_classes)
    : features_(std::move(features)), labels_(std::move(labels)), num_known_classes_(num_known_classes) {
  require(num_known_classes_ >= 1, "dataset: number of known classes must be positive");
  require(features_.rows() >= 1, "dataset: at least one sample required");
  require(features_.cols() >= 1, "dataset: feature dimension must be positive");
  require(static_cast<Eigen::Index>(labels_.size()) == features_.rows(),
          "dataset: " + std::to_string(labels_.size()) + " labels for " +
              std::to_string(features_.rows()) + " rows");
  require(features_.allFinite(), "dataset: non-finite feature value");
  for (int y : labels_) {
    require(y >= 0 && y <= num_known_classes_,
            "dataset: label " + std::to_string(y) + " outside {0.." + std::to_string(num_known_classes_) + "}");
  }
}

bool Dataset::is_training() const {
  return std::none_of(labels_.begin(), labels_.end(), [&](int y) { return y == num_known_classes_; });
}

bool Dataset::operator==(const Dataset& other) const {
  return num_known_classes_ == other.num_known_classes_ && labels_ == other.labels_ &&
         features_.rows() == other.features_.rows() && features_.cols() == other.features_.cols() &&
         features_ == other.features_;
}

FeatureMatrix::FeatureMatrix(Eigen::MatrixXd values) : values_(std::move(values)) {
  require(values_.rows() >= 1, "feature matrix: at least one row required");
  require(values_.cols() >= 1, "feature matrix: at least one column required");
  require(values_.allFinite(), "feature matrix: non-finite entry");
}

Box::Box(Eigen::VectorXd lo, Eigen::VectorXd hi) : lower(std::move(lo)), upper(std::move(hi)) {
  require(lower.size() == upper.size() && lower.size() >= 1, "box: bound dimensions differ or are empty");
  for (Eigen::Index i = 0; i < lower.size(); ++i) {
    require(lower[i] < upper[i], "box: lower bound not below upper bound in dimension " + std::to_string(i));
  }
}

bool Box::contains(const Eigen::Ref<const Eigen::VectorXd>& x) const {
  if (x.size() != dim()) return false;
  return ((x.array() >= lower.array()) && (x.array() <= upper.array())).all();
}

Box default_unknown_box() { return Box(Eigen::Vector2d(-1.5, -1.0), Eigen::Vector2d(2.5, 1.5)); }

namespace {

// Distance to the unit-circle arc centered at (cx, cy) covering the half-plane
// side selected by `upper` (angles [0, pi] when true, [pi, 2 pi] otherwise).
double arc_distance(double x, double y, double cx, double cy, bool upper) {
  const double qx = x - cx;
  const double qy = y - cy;
  const bool on_arc_side = upper ? qy >= 0.0 : qy <= 0.0;
  if (on_arc_side) return std::abs(std::hypot(qx, qy) - 1.0);
  return std::min(std::hypot(qx - 1.0, qy), std::hypot(qx + 1.0, qy));
}

}  // namespace

double distance_to_upper_moon(double x, double y) { return arc_distance(x, y, 0.0, 0.0, true); }

double distance_to_lower_moon(double x, double y) { return arc_distance(x, y, 1.0, 0.5, false); }

Dataset gen_double_moon(Eigen::Index n, double noise, Rng& rng) {
  require(n >= 2 && n % 2 == 0, "gen_double_moon: n must be even and at least 2, got " + std::to_string(n));
  require(noise >= 0.0 && std::isfinite(noise), "gen_double_moon: noise must be nonnegative");
  const Eigen::Index half = n / 2;
  Eigen::MatrixXd x(n, 2);
  std::vector<int> labels(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) {
    const double t = std::numbers::pi * rng.uniform();
    const bool upper = i < half;
    double px = upper ? std::cos(t) : 1.0 - std::cos(t);
    double py = upper ? std::sin(t) : 0.5 - std::sin(t);
    if (noise > 0.0) {
      px += noise * rng.normal();
      py += noise * rng.normal();
    }
    x(i, 0) = px;
    x(i, 1) = py;
    labels[static_cast<std::size_t>(i)] = upper ? 0 : 1;
  }
  return Dataset(std::move(x), std::move(labels), 2);
}

FeatureMatrix gen_unknown_uniform(Eigen::Index n, const Box& box, double exclusion_margin, Rng& rng) {
  require(n >= 1, "gen_unknown_uniform: n must be positive");
  require(exclusion_margin >= 0.0, "gen_unknown_uniform: exclusion margin must be nonnegative");
  require(exclusion_margin == 0.0 || box.dim() == 2,
          "gen_unknown_uniform: moon exclusion requires a 2-D box");
  Eigen::MatrixXd out(n, box.dim());
  const Eigen::Index max_draws = 1000 * n;
  Eigen::Index draws = 0;
  Eigen::VectorXd p(box.dim());
  for (Eigen::Index i = 0; i < n;) {
    if (draws >= max_draws) {
      throw Error(ErrorKind::infeasible_region,
                  "gen_unknown_uniform: exclusion region covers the box (" + std::to_string(draws) +
                      " draws for " + std::to_string(n) + " samples)");
    }
    ++draws;
    for (Eigen::Index k = 0; k < box.dim(); ++k) p[k] = rng.uniform(box.lower[k], box.upper[k]);
    if (exclusion_margin > 0.0 && (distance_to_upper_moon(p[0], p[1]) <= exclusion_margin ||
                                   distance_to_lower_moon(p[0], p[1]) <= exclusion_margin)) {
      continue;
    }
    out.row(i++) = p.transpose();
  }
  return FeatureMatrix(std::move(out));
}

FeatureMatrix gen_gaussian_blob(Eigen::Index n, const Eigen::VectorXd& mean, double stddev, Rng& rng) {
  require(n >= 1, "gen_gaussian_blob: n must be positive");
  require(mean.size() >= 1, "gen_gaussian_blob: mean must be nonempty");
  require(stddev > 0.0 && std::isfinite(stddev), "gen_gaussian_blob: stddev must be positive");
  Eigen::MatrixXd out(n, mean.size());
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index k = 0; k < mean.size(); ++k) out(i, k) = mean[k] + stddev * rng.normal();
  }
  return FeatureMatrix(std::move(out));
}

Box bounding_box(const Eigen::MatrixXd& features, double margin_fraction) {
  require(features.rows() >= 1 && features.cols() >= 1, "bounding_box: empty input");
  require(margin_fraction >= 0.0, "bounding_box: margin fraction must be nonnegative");
  Eigen::VectorXd lo = features.colwise().minCoeff().transpose();
  Eigen::VectorXd hi = features.colwise().maxCoeff().transpose();
  for (Eigen::Index k = 0; k < lo.size(); ++k) {
    const double width = hi[k] - lo[k];
    const double pad = width > 0.0 ? margin_fraction * width : std::max(1e-6, margin_fraction);
    lo[k] -= pad;
    hi[k] += pad;
  }
  return Box(std::move(lo), std::move(hi));
}

FeatureMatrix sample_uniform_box(Eigen::Index n, const Box& box, Rng& rng) {
  require(n >= 1, "sample_uniform_box: n must be positive");
  Eigen::MatrixXd out(n, box.dim());
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index k = 0; k < box.dim(); ++k) out(i, k) = rng.uniform(box.lower[k], box.upper[k]);
  }
  return FeatureMatrix(std::move(out));
}

}  // namespace aosr
