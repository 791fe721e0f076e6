#pragma once

#include <Eigen/Dense>
#include <optional>

namespace aosr {

/// Piecewise-linear transform parameters for auxiliary-sample weights.
struct WeightParams {
  double tau = 0.1;
  double beta = 0.05;
  double t = 0.1;            ///< fraction of auxiliary samples treated as unknown
  double u_zero_mass = 0.0;  ///< estimate of U(r = 0)

  void validate() const;
};

/// Normalizers of the ideal auxiliary domain for given beta and U(r = 0).
struct IadParams {
  double beta = 0.05;
  double u_zero_mass = 0.0;

  IadParams(double beta, double u_zero_mass);

  double gamma() const;
  double alpha() const { return 1.0 - gamma(); }
  bool has_gamma_prime() const { return u_zero_mass > 0.0; }
  /// Throws undefined_normalizer when U(r = 0) = 0.
  double gamma_prime() const;
  /// alpha gamma' / (1 - alpha), the proxy-risk coefficient.
  double proxy_coefficient() const;
};

/// x + beta for x <= 0, x otherwise.
double l0_transform(double x, double beta);

/// x + beta up to tau, identity from 2 tau, linear bridge in between.
double l_transform(double x, double tau, double beta);

/// x + beta up to tau, 0 from 2 tau, linear bridge in between; clamped at 0.
double l_minus_transform(double x, double tau, double beta);

Eigen::VectorXd l_transform(const Eigen::VectorXd& x, double tau, double beta);
Eigen::VectorXd l_minus_transform(const Eigen::VectorXd& x, double tau, double beta);

/// 1 / (1 + beta u0).
double gamma(double beta, double u_zero_mass);
/// 1 / u0; throws undefined_normalizer when u0 = 0.
double gamma_prime(double u_zero_mass);

/// Fraction of weights at or below tau.
double estimate_u_zero_mass(const Eigen::VectorXd& weights, double tau);

/// The ceil(t m)-th smallest weight, floored at 1e-6.
double select_tau(const Eigen::VectorXd& weights, double t);

inline constexpr double kMuCap = 1e6;
inline constexpr double kTauFloor = 1e-6;

/// n beta / (n' + 1e-4), capped at 1e6.
double mu_schedule(long n, double beta, long n_unknown);

}  // namespace aosr
