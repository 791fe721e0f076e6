#pragma once

#include <Eigen/Dense>

namespace aosr {

/// Kernel expansion w(x) = sum_j coefficients_j K(x, center_j) fitted by
/// kernel unconstrained least-squares importance fitting.
struct KulsifModel {
  Eigen::MatrixXd centers;  ///< rows of S followed by rows of T
  Eigen::VectorXd coefficients;
  double sigma = 1.0;
  double lambda = 1e-2;
  Eigen::Index num_source = 0;  ///< n, the leading block of centers
  Eigen::Index num_aux = 0;     ///< m

  Eigen::Index dim() const noexcept { return centers.cols(); }
};

inline constexpr double kKulsifJitter = 1e-10;

/// Solves ((1/m) K_ZT K_TZ + lambda K_ZZ + jitter I) gamma = (1/n) K_ZS 1 over
/// Z = S ++ T. Throws numerical when the system cannot be solved to 1e-8 relative residual.
KulsifModel kulsif_fit(const Eigen::MatrixXd& source, const Eigen::MatrixXd& aux, double lambda, double sigma);

/// (1/m) sum_T w^2 - (2/n) sum_S w + lambda gamma' K_ZZ gamma for the model's expansion.
double kulsif_objective(const KulsifModel& model, const Eigen::MatrixXd& source, const Eigen::MatrixXd& aux);

/// Same objective for an arbitrary coefficient vector over the model's centers.
double kulsif_objective(const KulsifModel& model, const Eigen::VectorXd& coefficients, const Eigen::MatrixXd& source,
                        const Eigen::MatrixXd& aux);

/// Gradient of the objective with respect to the coefficients.
Eigen::VectorXd kulsif_gradient(const KulsifModel& model, const Eigen::VectorXd& coefficients,
                                const Eigen::MatrixXd& source, const Eigen::MatrixXd& aux);

/// Raw expansion values (may be negative).
Eigen::VectorXd kulsif_expansion(const KulsifModel& model, const Eigen::MatrixXd& x);

/// Expansion clamped below at 0.
Eigen::VectorXd ratio_predict(const KulsifModel& model, const Eigen::MatrixXd& x);

}  // namespace aosr
