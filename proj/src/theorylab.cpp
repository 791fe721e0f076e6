#include "aosr/theorylab.hpp"

#include <algorithm>
#include <cmath>
#include <json.hpp>
#include <limits>
#include <sstream>

#include "aosr/csv.hpp"
#include "aosr/error.hpp"
#include "aosr/kernel.hpp"
#include "aosr/kulsif.hpp"
#include "aosr/reweight.hpp"

namespace aosr {
namespace {

constexpr Eigen::Index kMcChunk = 1 << 16;

double simpson_step(const std::function<double(double)>& f, double a, double b, double fa, double fm, double fb,
                    double whole, double tol, int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m);
  const double rm = 0.5 * (m + b);
  const double flm = f(lm);
  const double frm = f(rm);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  const double diff = left + right - whole;
  if (depth <= 0 || std::abs(diff) <= 15.0 * tol) return left + right + diff / 15.0;
  return simpson_step(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
         simpson_step(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

double simpson(const std::function<double(double)>& f, double a, double b, double tol) {
  const double fa = f(a);
  const double fb = f(b);
  const double fm = f(0.5 * (a + b));
  const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  return simpson_step(f, a, b, fa, fm, fb, whole, tol, 40);
}

Eigen::VectorXd hard_labels_loss(const Eigen::MatrixXd& probs_h, const Eigen::MatrixXd& probs_other) {
  std::vector<int> labels(static_cast<std::size_t>(probs_other.rows()));
  for (Eigen::Index i = 0; i < probs_other.rows(); ++i) labels[i] = argmax_lowest(probs_other.row(i));
  return label_losses(probs_h, labels);
}

void check_pool(const HypothesisPool& pool) {
  require(!pool.empty(), "hypothesis pool is empty");
  for (const auto& h : pool) require(static_cast<bool>(h), "hypothesis pool contains an empty function");
}

/// Draws x ~ q in chunks and accumulates f over each chunk.
template <typename F>
double mc_mean(const SyntheticTask& task, long n, Rng& rng, F&& chunk_sum) {
  double total = 0.0;
  for (long start = 0; start < n; start += kMcChunk) {
    const Eigen::Index len = static_cast<Eigen::Index>(std::min<long>(kMcChunk, n - start));
    Eigen::MatrixXd x(len, 1);
    for (Eigen::Index i = 0; i < len; ++i) x(i, 0) = task.sample_q(rng);
    total += chunk_sum(x);
  }
  return total / static_cast<double>(n);
}

std::uint64_t trial_seed(std::uint64_t seed, long n, int trial) {
  return splitmix64(seed ^ splitmix64(static_cast<std::uint64_t>(n) * 1000003ULL + static_cast<std::uint64_t>(trial)));
}

}  // namespace

double integrate(const std::function<double(double)>& f, double a, double b, const std::vector<double>& breakpoints,
                 double tol) {
  require(a <= b, "integrate: empty interval");
  std::vector<double> cuts{a};
  for (double c : breakpoints) {
    if (c > a && c < b) cuts.push_back(c);
  }
  cuts.push_back(b);
  std::sort(cuts.begin(), cuts.end());
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    // Nudge inward so one-sided limits are used at discontinuities.
    const double width = cuts[i + 1] - cuts[i];
    if (width <= 0.0) continue;
    const double eps = width * 1e-12;
    total += simpson(f, cuts[i] + eps, cuts[i + 1] - eps, tol);
  }
  return total;
}

double SyntheticTask::ratio(double x) const {
  const double qx = q(x);
  return qx > 0.0 ? p(x) / qx : 0.0;
}

double SyntheticTask::u_zero_mass() const {
  return integrate([this](double x) { return ratio(x) == 0.0 ? q(x) : 0.0; }, lower, upper, breakpoints);
}

void SyntheticTask::validate() const {
  require(p && q && label && sample_p && sample_q, "task: all functions must be set");
  require(num_known_classes >= 1, "task: at least one known class required");
  require(lower < upper, "task: empty support");
  const double mass_p = integrate(p, lower, upper, breakpoints);
  const double mass_q = integrate(q, lower, upper, breakpoints);
  require(std::abs(mass_p - 1.0) <= 1e-6, "task: p does not integrate to 1 (" + format_double(mass_p) + ")");
  require(std::abs(mass_q - 1.0) <= 1e-6, "task: q does not integrate to 1 (" + format_double(mass_q) + ")");
  constexpr int kGrid = 4001;
  for (int i = 0; i < kGrid; ++i) {
    const double x = lower + (upper - lower) * i / (kGrid - 1);
    require(p(x) >= 0.0 && q(x) >= 0.0, "task: densities must be nonnegative");
    require(!(p(x) > 0.0 && q(x) == 0.0), "task: p must be absolutely continuous with respect to q");
    const int y = label(x);
    require(y >= 0 && y <= num_known_classes, "task: label outside {0..C}");
  }
}

SyntheticTask default_task() {
  SyntheticTask task;
  task.p = [](double x) { return x >= 0.0 && x <= 2.0 ? 0.5 : 0.0; };
  task.q = [](double x) { return x >= 0.0 && x <= 4.0 ? 0.25 : 0.0; };
  task.label = [](double x) { return x < 1.0 ? 0 : (x <= 2.0 ? 1 : 2); };
  task.sample_p = [](Rng& rng) { return rng.uniform(0.0, 2.0); };
  task.sample_q = [](Rng& rng) { return rng.uniform(0.0, 4.0); };
  task.num_known_classes = 2;
  task.lower = 0.0;
  task.upper = 4.0;
  task.breakpoints = {1.0, 2.0};
  return task;
}

Hypothesis default_task_hypothesis() {
  return [](const Eigen::MatrixXd& x) {
    require(x.cols() == 1, "default hypothesis takes 1-D input");
    Eigen::MatrixXd probs(x.rows(), 3);
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
      const double v = x(i, 0);
      const double z[3] = {-(v - 0.5) * (v - 0.5), -(v - 1.5) * (v - 1.5), 1.0 - 2.0 * (v - 1.0) * (v - 1.0)};
      const double zmax = std::max({z[0], z[1], z[2]});
      double sum = 0.0;
      for (int k = 0; k < 3; ++k) sum += (probs(i, k) = std::exp(z[k] - zmax));
      probs.row(i) /= sum;
    }
    return probs;
  };
}

double alpha_risk_empirical(const Hypothesis& h, const Dataset& known, const Eigen::MatrixXd& unknown, double alpha) {
  require(alpha >= 0.0 && alpha <= 1.0, "alpha must lie in [0, 1]");
  require(unknown.rows() >= 1, "unknown sample set is empty");
  const double known_risk = empirical_risk_s(h, known);
  const double unknown_risk = unknown_losses(h(unknown)).mean();
  return (1.0 - alpha) * known_risk + alpha * unknown_risk;
}

double disparity_discrepancy_empirical(const Hypothesis& h, const HypothesisPool& pool, const Eigen::MatrixXd& samples_p,
                                       const Eigen::MatrixXd& samples_q) {
  check_pool(pool);
  require(samples_p.rows() >= 1 && samples_q.rows() >= 1, "disparity discrepancy needs nonempty samples");
  const Eigen::MatrixXd hp = h(samples_p);
  const Eigen::MatrixXd hq = h(samples_q);
  double best = 0.0;
  for (const auto& other : pool) {
    const double mp = hard_labels_loss(hp, other(samples_p)).mean();
    const double mq = hard_labels_loss(hq, other(samples_q)).mean();
    best = std::max(best, std::abs(mp - mq));
  }
  return best;
}

double combined_risk_empirical(const HypothesisPool& pool, const Eigen::MatrixXd& unknown_p,
                               const Eigen::MatrixXd& unknown_q) {
  check_pool(pool);
  require(unknown_p.rows() >= 1 && unknown_q.rows() >= 1, "combined risk needs nonempty samples");
  double best = std::numeric_limits<double>::infinity();
  for (const auto& h : pool) {
    best = std::min(best, unknown_losses(h(unknown_p)).mean() + unknown_losses(h(unknown_q)).mean());
  }
  return best;
}

double iad_weight(double r, double beta, double gamma) {
  require(r >= 0.0 && std::isfinite(r), "iad_weight: ratio must be finite and nonnegative");
  require(beta >= 0.0 && gamma > 0.0, "iad_weight: beta >= 0 and gamma > 0 required");
  return gamma * l0_transform(r, beta);
}

double mc_iad_risk(const Hypothesis& h, const SyntheticTask& task, double beta, long n_mc, Rng& rng) {
  require(n_mc >= 1, "n_mc must be positive");
  require(static_cast<bool>(task.sample_q), "task has no sampler");
  const double g = gamma(beta, task.u_zero_mass());
  return mc_mean(task, n_mc, rng, [&](const Eigen::MatrixXd& x) {
    const Eigen::MatrixXd probs = h(x);
    double sum = 0.0;
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
      const double w = iad_weight(task.ratio(x(i, 0)), beta, g);
      if (w == 0.0) continue;
      sum += weighted_cross_entropy(probs.row(i).transpose(), task.label(x(i, 0)), w);
    }
    return sum;
  });
}

double mc_iad_mass(const SyntheticTask& task, double beta, long n, Rng& rng) {
  require(n >= 1, "sample count must be positive");
  const double g = gamma(beta, task.u_zero_mass());
  return mc_mean(task, n, rng, [&](const Eigen::MatrixXd& x) {
    double sum = 0.0;
    for (Eigen::Index i = 0; i < x.rows(); ++i) sum += iad_weight(task.ratio(x(i, 0)), beta, g);
    return sum;
  });
}

double quadrature_iad_risk(const Hypothesis& h, const SyntheticTask& task, double beta) {
  const double g = gamma(beta, task.u_zero_mass());
  auto integrand = [&](double x) {
    const double w = iad_weight(task.ratio(x), beta, g);
    if (w == 0.0) return 0.0;
    Eigen::MatrixXd point(1, 1);
    point(0, 0) = x;
    const Eigen::MatrixXd probs = h(point);
    return task.q(x) * weighted_cross_entropy(probs.row(0).transpose(), task.label(x), w);
  };
  return integrate(integrand, task.lower, task.upper, task.breakpoints, 1e-12);
}

std::string to_string(RatioSource source) { return source == RatioSource::true_ratio ? "true" : "kulsif"; }

RatioSource ratio_source_from_string(const std::string& name) {
  if (name == "true") return RatioSource::true_ratio;
  if (name == "kulsif") return RatioSource::kulsif;
  throw Error(ErrorKind::invalid_argument, "unknown ratio source '" + name + "' (expected true or kulsif)");
}

void GapExperimentConfig::validate() const {
  require(n_grid.size() >= 3, "n grid needs at least 3 sizes");
  for (std::size_t i = 0; i < n_grid.size(); ++i) {
    require(n_grid[i] >= 2, "sizes must be at least 2");
    if (i > 0) require(n_grid[i] > n_grid[i - 1], "sizes must be strictly ascending");
  }
  require(trials >= 5, "at least 5 trials required");
  require(std::isfinite(beta) && beta >= 0.0, "beta must be nonnegative");
  require(std::isfinite(tau) && tau > 0.0, "tau must be positive");
  require(n_mc >= 1, "n_mc must be positive");
  require(rate_delta > 0.0 && rate_delta < 1.0, "rate_delta must lie in (0, 1)");
  require(lambda_scale > 0.0, "lambda scale must be positive");
}

double GapExperimentConfig::lambda(long n) const {
  return lambda_scale * std::pow(static_cast<double>(n), -(1.0 - rate_delta));
}

bool GapExperimentResult::medians_strictly_decreasing() const {
  for (std::size_t i = 1; i < median_gap.size(); ++i) {
    if (!(median_gap[i] < median_gap[i - 1])) return false;
  }
  return true;
}

std::string GapExperimentResult::rows_csv() const {
  std::ostringstream out;
  out << "n,trial,gap\n";
  for (const auto& row : rows) out << row.n << ',' << row.trial << ',' << format_double(row.gap) << '\n';
  return out.str();
}

std::string GapExperimentResult::summary_csv() const {
  std::ostringstream out;
  out << "n,median_gap\n";
  for (std::size_t i = 0; i < n_grid.size(); ++i) out << n_grid[i] << ',' << format_double(median_gap[i]) << '\n';
  return out.str();
}

std::string GapExperimentResult::summary_json() const {
  nlohmann::json j;
  j["n"] = n_grid;
  j["median_gap"] = median_gap;
  j["slope"] = slope;
  j["oracle"] = oracle;
  j["alpha"] = alpha;
  j["strictly_decreasing"] = medians_strictly_decreasing();
  return j.dump(1);
}

double median(std::vector<double> values) {
  require(!values.empty(), "median of an empty set");
  const std::size_t mid = values.size() / 2;
  std::nth_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(mid), values.end());
  const double upper = values[mid];
  if (values.size() % 2 == 1) return upper;
  const double lower = *std::max_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(mid));
  return 0.5 * (lower + upper);
}

double log_log_slope(const std::vector<double>& x, const std::vector<double>& y) {
  require(x.size() == y.size() && x.size() >= 2, "slope fit needs at least two paired points");
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    require(x[i] > 0.0 && y[i] > 0.0, "log-log fit needs positive values");
    mx += std::log(x[i]);
    my += std::log(y[i]);
  }
  mx /= static_cast<double>(x.size());
  my /= static_cast<double>(x.size());
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = std::log(x[i]) - mx;
    sxy += dx * (std::log(y[i]) - my);
    sxx += dx * dx;
  }
  return sxy / sxx;
}

GapExperimentResult theorem3_gap_experiment(const Hypothesis& h, const SyntheticTask& task,
                                            const GapExperimentConfig& config) {
  config.validate();
  task.validate();
  const double u0 = task.u_zero_mass();
  const double alpha = IadParams(config.beta, u0).alpha();

  GapExperimentResult result;
  result.alpha = alpha;
  result.n_grid = config.n_grid;
  Rng oracle_rng(splitmix64(config.seed ^ 0x6F7261636C65ULL));
  result.oracle = mc_iad_risk(h, task, config.beta, config.n_mc, oracle_rng);

  for (long n : config.n_grid) {
    std::vector<double> gaps;
    for (int trial = 0; trial < config.trials; ++trial) {
      Rng rng(trial_seed(config.seed, n, trial));
      Eigen::MatrixXd s(n, 1);
      std::vector<int> labels(static_cast<std::size_t>(n));
      for (long i = 0; i < n; ++i) {
        s(i, 0) = task.sample_p(rng);
        labels[static_cast<std::size_t>(i)] = task.label(s(i, 0));
      }
      Eigen::MatrixXd t(n, 1);
      for (long i = 0; i < n; ++i) t(i, 0) = task.sample_q(rng);

      Eigen::VectorXd weights(n);
      if (config.ratio_source == RatioSource::true_ratio) {
        for (long i = 0; i < n; ++i) weights(i) = task.ratio(t(i, 0));
      } else {
        Eigen::MatrixXd z(2 * n, 1);
        z << s, t;
        const KulsifModel model = kulsif_fit(s, t, config.lambda(n), median_bandwidth(z));
        weights = ratio_predict(model, t);
      }
      const Dataset sample(std::move(s), std::move(labels), task.num_known_classes);
      const double aux = auxiliary_risk(h, sample, t, weights, config.tau, config.beta);
      const double gap = std::abs((1.0 - alpha) * aux - result.oracle);
      result.rows.push_back(GapRow{n, trial, gap});
      gaps.push_back(gap);
    }
    result.median_gap.push_back(median(gaps));
  }

  std::vector<double> xs(config.n_grid.begin(), config.n_grid.end());
  result.slope = log_log_slope(xs, result.median_gap);
  return result;
}

}  // namespace aosr
