#include "aosr/kernel.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "aosr/error.hpp"

namespace aosr {

Eigen::MatrixXd gaussian_gram(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b, double sigma) {
  require(sigma > 0.0 && std::isfinite(sigma), "gaussian_gram: bandwidth must be positive");
  require(a.cols() == b.cols(), "gaussian_gram: dimension mismatch");
  const Eigen::VectorXd a_sq = a.rowwise().squaredNorm();
  const Eigen::VectorXd b_sq = b.rowwise().squaredNorm();
  Eigen::MatrixXd k = -2.0 * a * b.transpose();
  k.colwise() += a_sq;
  k.rowwise() += b_sq.transpose();
  const double scale = -1.0 / (2.0 * sigma * sigma);
  // The expansion can dip slightly below zero for coincident points.
  return (k.array().max(0.0) * scale).exp().matrix();
}

double median_bandwidth(const Eigen::MatrixXd& points) {
  require(points.rows() >= 2, "median_bandwidth: at least two points required");
  constexpr Eigen::Index kMaxPoints = 1000;
  const Eigen::Index n = points.rows();
  const Eigen::Index count = std::min(n, kMaxPoints);
  std::vector<Eigen::Index> idx(static_cast<std::size_t>(count));
  for (Eigen::Index i = 0; i < count; ++i) idx[static_cast<std::size_t>(i)] = i * n / count;

  std::vector<double> dists;
  dists.reserve(static_cast<std::size_t>(count * (count - 1) / 2));
  for (std::size_t i = 0; i < idx.size(); ++i) {
    for (std::size_t j = i + 1; j < idx.size(); ++j) {
      dists.push_back((points.row(idx[i]) - points.row(idx[j])).norm());
    }
  }
  // Lower median for even counts.
  const auto mid = dists.begin() + static_cast<std::ptrdiff_t>((dists.size() - 1) / 2);
  std::nth_element(dists.begin(), mid, dists.end());
  return *mid > 0.0 ? *mid : 1.0;
}

}  // namespace aosr
