#pragma once

#include <Eigen/Dense>

namespace aosr {

/// K(i, j) = exp(-|a_i - b_j|^2 / (2 sigma^2)).
Eigen::MatrixXd gaussian_gram(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b, double sigma);

/// Median pairwise distance over at most 1000 evenly strided rows; 1.0 if the median is 0.
double median_bandwidth(const Eigen::MatrixXd& points);

}  // namespace aosr
