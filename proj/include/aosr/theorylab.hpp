#pragma once

#include <Eigen/Dense>
#include <functional>
#include <string>
#include <vector>

#include "aosr/dataset.hpp"
#include "aosr/risk.hpp"
#include "aosr/rng.hpp"

namespace aosr {

/// 1-D task with analytic known-class density p, auxiliary density q and a
/// deterministic labelling rule. Label C marks the unknown class.
struct SyntheticTask {
  std::function<double(double)> p;
  std::function<double(double)> q;
  std::function<int(double)> label;
  std::function<double(Rng&)> sample_p;
  std::function<double(Rng&)> sample_q;
  int num_known_classes = 2;
  double lower = 0.0;  ///< support of q
  double upper = 1.0;
  std::vector<double> breakpoints;  ///< points where p or q may be discontinuous

  double ratio(double x) const;
  /// U(r = 0) by quadrature.
  double u_zero_mass() const;
  /// Nonnegativity, unit mass of p and q, and supp p within supp q.
  void validate() const;
};

/// U = uniform on [0, 4], p = uniform on [0, 2]; labels 0 on [0, 1), 1 on
/// [1, 2], unknown on (2, 4]. So r = 2 on [0, 2] and 0 beyond, U(r = 0) = 0.5.
SyntheticTask default_task();

/// Soft rule over {0, 1, unknown} with logits -(x - 0.5)^2, -(x - 1.5)^2 and
/// 1 - 2 (x - 1)^2. It is never exactly right, and it underrates the unknown
/// class far from the known support.
Hypothesis default_task_hypothesis();

/// Integral of f over [a, b] by adaptive Simpson, split at the given breakpoints.
double integrate(const std::function<double(double)>& f, double a, double b,
                 const std::vector<double>& breakpoints = {}, double tol = 1e-10);

using HypothesisPool = std::vector<Hypothesis>;

/// (1 - alpha) mean known loss + alpha mean unknown loss.
double alpha_risk_empirical(const Hypothesis& h, const Dataset& known, const Eigen::MatrixXd& unknown, double alpha);

/// Max over the pool of |mean_P l(h, h') - mean_Q l(h, h')|, where l(h, h')
/// is the cross-entropy of h against the hard label of h'.
double disparity_discrepancy_empirical(const Hypothesis& h, const HypothesisPool& pool, const Eigen::MatrixXd& samples_p,
                                       const Eigen::MatrixXd& samples_q);

/// Min over the pool of mean unknown loss on P plus mean unknown loss on Q.
double combined_risk_empirical(const HypothesisPool& pool, const Eigen::MatrixXd& unknown_p,
                               const Eigen::MatrixXd& unknown_q);

/// gamma L0(r).
double iad_weight(double r, double beta, double gamma);

/// Importance form over n_mc draws from q.
double mc_iad_risk(const Hypothesis& h, const SyntheticTask& task, double beta, long n_mc, Rng& rng);

/// (1/N) sum gamma L0(r(x)) for x ~ q; 1 in expectation.
double mc_iad_mass(const SyntheticTask& task, double beta, long n, Rng& rng);

/// Exact IAD risk by quadrature, for cross-checking the Monte Carlo oracle.
double quadrature_iad_risk(const Hypothesis& h, const SyntheticTask& task, double beta);

enum class RatioSource { true_ratio, kulsif };
std::string to_string(RatioSource source);
RatioSource ratio_source_from_string(const std::string& name);

struct GapExperimentConfig {
  std::vector<long> n_grid{100, 400, 1600, 6400};
  int trials = 10;
  double beta = 0.05;
  double tau = 0.1;
  RatioSource ratio_source = RatioSource::true_ratio;
  long n_mc = 1000000;
  double rate_delta = 0.1;    ///< lambda = lambda_scale * n^-(1 - rate_delta)
  double lambda_scale = 1.0;  ///< only used with the kulsif source
  std::uint64_t seed = 0;

  void validate() const;
  double lambda(long n) const;
};

struct GapRow {
  long n = 0;
  int trial = 0;
  double gap = 0.0;
};

struct GapExperimentResult {
  std::vector<GapRow> rows;
  std::vector<long> n_grid;
  std::vector<double> median_gap;
  double slope = 0.0;
  double oracle = 0.0;
  double alpha = 0.0;

  bool medians_strictly_decreasing() const;
  std::string rows_csv() const;     ///< n,trial,gap
  std::string summary_csv() const;  ///< n,median_gap
  std::string summary_json() const;
};

/// Gap between (1 - alpha) times the auxiliary risk on S ~ p, T ~ q (m = n)
/// and the Monte Carlo IAD risk, across sample sizes.
GapExperimentResult theorem3_gap_experiment(const Hypothesis& h, const SyntheticTask& task,
                                            const GapExperimentConfig& config);

double median(std::vector<double> values);
/// Least-squares slope of log(y) against log(x).
double log_log_slope(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace aosr
