#include "aosr/risk.hpp"

#include <algorithm>
#include <cmath>

#include <json.hpp>

#include "aosr/error.hpp"

namespace aosr {

Hypothesis as_hypothesis(const MlpModel& model) {
  return [model](const Eigen::MatrixXd& x) { return forward(model, x); };
}

Eigen::VectorXd unknown_losses(const Eigen::MatrixXd& probs) {
  require(probs.cols() >= 2, "risk: hypothesis must have at least two outputs");
  return -probs.col(probs.cols() - 1).cwiseMax(kProbabilityFloor).array().log();
}

Eigen::VectorXd label_losses(const Eigen::MatrixXd& probs, const std::vector<int>& labels) {
  require(static_cast<Eigen::Index>(labels.size()) == probs.rows(), "risk: label count mismatch");
  Eigen::VectorXd out(probs.rows());
  for (Eigen::Index i = 0; i < probs.rows(); ++i) {
    const int y = labels[static_cast<std::size_t>(i)];
    require(y >= 0 && y < probs.cols(), "risk: label outside hypothesis output width");
    out[i] = -std::log(std::max(probs(i, y), kProbabilityFloor));
  }
  return out;
}

namespace {

Eigen::MatrixXd evaluate(const Hypothesis& h, const Eigen::MatrixXd& x) {
  require(static_cast<bool>(h), "risk: empty hypothesis");
  Eigen::MatrixXd p = h(x);
  require(p.rows() == x.rows(), "risk: hypothesis returned wrong row count");
  return p;
}

void check_open_set(const Eigen::MatrixXd& probs, const Dataset& s) {
  require(probs.cols() == s.num_known_classes() + 1,
          "risk: open-set hypothesis needs C+1 = " + std::to_string(s.num_known_classes() + 1) + " outputs");
}

void check_weights(const Eigen::MatrixXd& t, const Eigen::VectorXd& weights) {
  require(t.rows() >= 1, "risk: empty auxiliary sample");
  require(weights.size() == t.rows(), "risk: " + std::to_string(weights.size()) + " weights for " +
                                          std::to_string(t.rows()) + " auxiliary samples");
}

double transformed_mean(const Eigen::VectorXd& losses, const Eigen::VectorXd& factors) {
  return factors.dot(losses) / static_cast<double>(losses.size());
}

struct Parts {
  double r_s;
  double r_s_unknown;
  Eigen::VectorXd t_unknown_losses;
};

Parts compute_parts(const Hypothesis& h, const Dataset& s, const Eigen::MatrixXd& t) {
  require(s.size() >= 1, "risk: empty S");
  const Eigen::MatrixXd ps = evaluate(h, s.features());
  check_open_set(ps, s);
  const Eigen::MatrixXd pt = evaluate(h, t);
  require(pt.cols() == ps.cols(), "risk: hypothesis width differs between S and T");
  return {label_losses(ps, s.labels()).mean(), unknown_losses(ps).mean(), unknown_losses(pt)};
}

}  // namespace

double empirical_risk_s(const Hypothesis& h, const Dataset& s) {
  require(s.size() >= 1, "empirical_risk_s: empty S");
  return label_losses(evaluate(h, s.features()), s.labels()).mean();
}

double empirical_risk_s_unknown(const Hypothesis& h, const Dataset& s) {
  require(s.size() >= 1, "empirical_risk_s_unknown: empty S");
  const Eigen::MatrixXd p = evaluate(h, s.features());
  check_open_set(p, s);
  return unknown_losses(p).mean();
}

double empirical_risk_t_unknown(const Hypothesis& h, const Eigen::MatrixXd& t, const Eigen::VectorXd& weights,
                                double tau, double beta) {
  check_weights(t, weights);
  return transformed_mean(unknown_losses(evaluate(h, t)), l_transform(weights, tau, beta));
}

double delta(const Hypothesis& h, const Dataset& s, const Eigen::MatrixXd& t, const Eigen::VectorXd& weights,
             double tau, double beta) {
  check_weights(t, weights);
  const Parts parts = compute_parts(h, s, t);
  const double r_t = transformed_mean(parts.t_unknown_losses, l_transform(weights, tau, beta));
  return std::max(r_t - parts.r_s_unknown, 0.0);
}

double auxiliary_risk(const Hypothesis& h, const Dataset& s, const Eigen::MatrixXd& t,
                      const Eigen::VectorXd& weights, double tau, double beta) {
  check_weights(t, weights);
  const Parts parts = compute_parts(h, s, t);
  const double r_t = transformed_mean(parts.t_unknown_losses, l_transform(weights, tau, beta));
  return parts.r_s + std::max(r_t - parts.r_s_unknown, 0.0);
}

double proxy_unknown_risk(const Hypothesis& h, const Eigen::MatrixXd& t, const Eigen::VectorXd& weights,
                          double tau, double beta) {
  check_weights(t, weights);
  return transformed_mean(unknown_losses(evaluate(h, t)), l_minus_transform(weights, tau, beta));
}

double proxy_auxiliary_risk(const Hypothesis& h, const Dataset& s, const Eigen::MatrixXd& t,
                            const Eigen::VectorXd& weights, const IadParams& iad, const WeightParams& params) {
  require(iad.alpha() < 1.0, "proxy_auxiliary_risk: alpha must be below 1");
  if (!iad.has_gamma_prime()) throw_invalid("proxy_auxiliary_risk: gamma' undefined since U(r=0) = 0");
  const double coefficient = iad.proxy_coefficient();
  return empirical_risk_s(h, s) + coefficient * proxy_unknown_risk(h, t, weights, params.tau, params.beta);
}

double training_objective(const Hypothesis& h, const Dataset& s, const Eigen::MatrixXd& t,
                          const Eigen::VectorXd& weights, double tau, double beta, double mu) {
  require(mu >= 0.0, "training_objective: mu must be nonnegative");
  const double r_s = empirical_risk_s(h, s);
  if (mu == 0.0) return r_s;
  return r_s + mu * proxy_unknown_risk(h, t, weights, tau, beta);
}

std::string RiskReport::to_json() const {
  const nlohmann::json j = {{"r_s", r_s},
                            {"r_s_unknown", r_s_unknown},
                            {"r_t_unknown", r_t_unknown},
                            {"delta", delta},
                            {"auxiliary_risk", auxiliary_risk},
                            {"proxy_unknown", proxy_unknown},
                            {"proxy_auxiliary", proxy_auxiliary},
                            {"objective", objective}};
  return j.dump(2);
}

RiskReport risk_report(const Hypothesis& h, const Dataset& s, const Eigen::MatrixXd& t,
                       const Eigen::VectorXd& weights, const WeightParams& params, double mu) {
  check_weights(t, weights);
  const Parts parts = compute_parts(h, s, t);
  RiskReport r;
  r.r_s = parts.r_s;
  r.r_s_unknown = parts.r_s_unknown;
  r.r_t_unknown = transformed_mean(parts.t_unknown_losses, l_transform(weights, params.tau, params.beta));
  r.delta = std::max(r.r_t_unknown - r.r_s_unknown, 0.0);
  r.auxiliary_risk = r.r_s + r.delta;
  r.proxy_unknown = transformed_mean(parts.t_unknown_losses, l_minus_transform(weights, params.tau, params.beta));
  const IadParams iad(params.beta, params.u_zero_mass);
  r.proxy_auxiliary = r.r_s + iad.proxy_coefficient() * r.proxy_unknown;
  r.objective = r.r_s + mu * r.proxy_unknown;
  return r;
}

}  // namespace aosr
