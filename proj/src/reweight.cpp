#include "aosr/reweight.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "aosr/error.hpp"

namespace aosr {

void WeightParams::validate() const {
  require(tau > 0.0, "weight params: tau must be positive");
  require(beta > 0.0, "weight params: beta must be positive");
  require(t > 0.0 && t < 1.0, "weight params: t must lie in (0, 1)");
  require(u_zero_mass >= 0.0 && u_zero_mass <= 1.0, "weight params: U(r=0) must lie in [0, 1]");
}

IadParams::IadParams(double b, double u0) : beta(b), u_zero_mass(u0) {
  require(beta >= 0.0 && std::isfinite(beta), "iad params: beta must be nonnegative");
  require(u0 >= 0.0 && u0 <= 1.0, "iad params: U(r=0) must lie in [0, 1]");
}

double IadParams::gamma() const { return 1.0 / (1.0 + beta * u_zero_mass); }

double IadParams::gamma_prime() const { return aosr::gamma_prime(u_zero_mass); }

double IadParams::proxy_coefficient() const {
  const double a = alpha();
  require(a < 1.0, "proxy coefficient: alpha must be below 1");
  return a * gamma_prime() / (1.0 - a);
}

double l0_transform(double x, double beta) { return x <= 0.0 ? x + beta : x; }

double l_transform(double x, double tau, double beta) {
  if (x <= tau) return x + beta;
  if (x >= 2.0 * tau) return x;
  return (1.0 - beta / tau) * x + 2.0 * beta;
}

double l_minus_transform(double x, double tau, double beta) {
  double y = 0.0;
  if (x <= tau) {
    y = x + beta;
  } else if (x < 2.0 * tau) {
    y = -((tau + beta) / tau) * x + 2.0 * tau + 2.0 * beta;
  }
  return std::max(y, 0.0);
}

Eigen::VectorXd l_transform(const Eigen::VectorXd& x, double tau, double beta) {
  return x.unaryExpr([&](double v) { return l_transform(v, tau, beta); });
}

Eigen::VectorXd l_minus_transform(const Eigen::VectorXd& x, double tau, double beta) {
  return x.unaryExpr([&](double v) { return l_minus_transform(v, tau, beta); });
}

double gamma(double beta, double u_zero_mass) { return IadParams(beta, u_zero_mass).gamma(); }

double gamma_prime(double u_zero_mass) {
  require(u_zero_mass >= 0.0 && u_zero_mass <= 1.0, "gamma_prime: U(r=0) must lie in [0, 1]");
  if (u_zero_mass == 0.0) throw Error(ErrorKind::undefined_normalizer, "gamma' is undefined when U(r=0) = 0");
  return 1.0 / u_zero_mass;
}

double estimate_u_zero_mass(const Eigen::VectorXd& weights, double tau) {
  require(weights.size() >= 1, "estimate_u_zero_mass: empty weights");
  const auto below = (weights.array() <= tau).count();
  return static_cast<double>(below) / static_cast<double>(weights.size());
}

double select_tau(const Eigen::VectorXd& weights, double t) {
  require(weights.size() >= 1, "select_tau: empty weights");
  require(t > 0.0 && t < 1.0, "select_tau: t must lie in (0, 1)");
  const auto m = weights.size();
  // Guard against t m landing a rounding error above an integer.
  auto k = static_cast<Eigen::Index>(std::ceil(t * static_cast<double>(m) - 1e-9));
  k = std::clamp<Eigen::Index>(k, 1, m);
  std::vector<double> sorted(weights.data(), weights.data() + m);
  std::nth_element(sorted.begin(), sorted.begin() + (k - 1), sorted.end());
  const double tau = sorted[static_cast<std::size_t>(k - 1)];
  return tau > 0.0 ? tau : kTauFloor;
}

double mu_schedule(long n, double beta, long n_unknown) {
  require(n >= 1, "mu_schedule: n must be positive");
  require(beta > 0.0, "mu_schedule: beta must be positive");
  require(n_unknown >= 0, "mu_schedule: n' must be nonnegative");
  const double mu = static_cast<double>(n) * beta / (static_cast<double>(n_unknown) + 1e-4);
  return std::min(mu, kMuCap);
}

}  // namespace aosr
