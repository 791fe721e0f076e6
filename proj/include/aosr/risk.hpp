#pragma once

#include <Eigen/Dense>
#include <functional>
#include <string>

#include "aosr/dataset.hpp"
#include "aosr/mlp.hpp"
#include "aosr/reweight.hpp"

namespace aosr {

/// Batch hypothesis: one probability row per input row. Open-set hypotheses
/// have C+1 outputs; the last column is the unknown class.
using Hypothesis = std::function<Eigen::MatrixXd(const Eigen::MatrixXd&)>;

Hypothesis as_hypothesis(const MlpModel& model);

/// Clamped cross-entropy of each row against `target`.
Eigen::VectorXd unknown_losses(const Eigen::MatrixXd& probs);
Eigen::VectorXd label_losses(const Eigen::MatrixXd& probs, const std::vector<int>& labels);

/// Mean loss at the true labels.
double empirical_risk_s(const Hypothesis& h, const Dataset& s);
/// Mean loss against the unknown label C over S's features.
double empirical_risk_s_unknown(const Hypothesis& h, const Dataset& s);
/// (1/m) sum_T L_{tau,beta}(w) l(h(x), unknown).
double empirical_risk_t_unknown(const Hypothesis& h, const Eigen::MatrixXd& t, const Eigen::VectorXd& weights,
                                double tau, double beta);
/// max(R_T - R_S(unknown), 0).
double delta(const Hypothesis& h, const Dataset& s, const Eigen::MatrixXd& t, const Eigen::VectorXd& weights,
             double tau, double beta);
/// R_S + delta.
double auxiliary_risk(const Hypothesis& h, const Dataset& s, const Eigen::MatrixXd& t,
                      const Eigen::VectorXd& weights, double tau, double beta);
/// (1/m) sum_T L-_{tau,beta}(w) l(h(x), unknown).
double proxy_unknown_risk(const Hypothesis& h, const Eigen::MatrixXd& t, const Eigen::VectorXd& weights,
                          double tau, double beta);
/// R_S + alpha gamma' / (1 - alpha) * proxy unknown risk.
double proxy_auxiliary_risk(const Hypothesis& h, const Dataset& s, const Eigen::MatrixXd& t,
                            const Eigen::VectorXd& weights, const IadParams& iad, const WeightParams& params);
/// R_S + mu * proxy unknown risk.
double training_objective(const Hypothesis& h, const Dataset& s, const Eigen::MatrixXd& t,
                          const Eigen::VectorXd& weights, double tau, double beta, double mu);

struct RiskReport {
  double r_s = 0.0;
  double r_s_unknown = 0.0;
  double r_t_unknown = 0.0;
  double delta = 0.0;
  double auxiliary_risk = 0.0;
  double proxy_unknown = 0.0;
  double proxy_auxiliary = 0.0;
  double objective = 0.0;

  std::string to_json() const;
};

/// Every risk for one hypothesis. proxy_auxiliary uses params.u_zero_mass for gamma'.
RiskReport risk_report(const Hypothesis& h, const Dataset& s, const Eigen::MatrixXd& t,
                       const Eigen::VectorXd& weights, const WeightParams& params, double mu);

}  // namespace aosr
