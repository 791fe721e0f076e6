#include "aosr/sweep.hpp"

#include <cmath>
#include <sstream>

#include "aosr/csv.hpp"
#include "aosr/error.hpp"
#include "aosr/metrics.hpp"
#include "aosr/theorylab.hpp"

namespace aosr {

std::vector<SweepSummary> SweepResult::summary() const {
  std::vector<SweepSummary> out;
  std::size_t i = 0;
  while (i < rows.size()) {
    const long n = rows[i].n;
    std::vector<double> errors;
    for (; i < rows.size() && rows[i].n == n; ++i) errors.push_back(rows[i].error);
    SweepSummary s;
    s.n = n;
    double sum = 0.0;
    for (double e : errors) sum += e;
    s.mean_error = sum / static_cast<double>(errors.size());
    if (errors.size() > 1) {
      double ss = 0.0;
      for (double e : errors) ss += (e - s.mean_error) * (e - s.mean_error);
      const double k = static_cast<double>(errors.size());
      s.stderr_error = std::sqrt(ss / (k - 1.0)) / std::sqrt(k);
    }
    s.median_error = median(errors);
    out.push_back(s);
  }
  return out;
}

std::string SweepResult::rows_csv() const {
  std::ostringstream out;
  out << "n,trial,error,bound_low,bound_high\n";
  for (const auto& r : rows) {
    out << r.n << ',' << r.trial << ',' << format_double(r.error) << ',' << format_double(r.bound_low) << ','
        << format_double(r.bound_high) << '\n';
  }
  return out.str();
}

std::string SweepResult::summary_csv() const {
  std::ostringstream out;
  out << "n,mean_error,stderr\n";
  for (const auto& s : summary()) {
    out << s.n << ',' << format_double(s.mean_error) << ',' << format_double(s.stderr_error) << '\n';
  }
  return out.str();
}

MoonTrial run_moon_trial(const AosrConfig& config, long n, double noise, std::uint64_t seed) {
  require(n >= 4 && n % 2 == 0, "training size must be even and at least 4, got " + std::to_string(n));
  Rng rng(seed);
  Rng train_rng = rng.fork(1);
  Rng test_rng = rng.fork(2);
  const Dataset train_set = gen_double_moon(n, noise, train_rng);

  AosrConfig cfg = config;
  cfg.seed = rng.fork(3).next_u64();
  const AosrResult fitted = run_aosr(cfg, train_set);

  // Known test points come in moon pairs, so an odd half rounds down.
  const long n_known = (n / 2) & ~1L;
  const long n_unknown = n - n_known;
  const int c = train_set.num_known_classes();
  MoonTrial trial;
  Eigen::MatrixXd x(n, 2);
  const Dataset known = gen_double_moon(n_known, noise, test_rng);
  x.topRows(n_known) = known.features();
  trial.truth = known.labels();
  const FeatureMatrix unknown = gen_unknown_uniform(n_unknown, default_unknown_box(), kDefaultExclusionMargin, test_rng);
  x.bottomRows(n_unknown) = unknown.values();
  trial.truth.insert(trial.truth.end(), static_cast<std::size_t>(n_unknown), c);

  trial.predicted = aosr_predict(fitted.model, x);
  trial.accuracy = accuracy(confusion(trial.truth, trial.predicted, c + 1));
  return trial;
}

SweepResult sweep_error_curve(const SweepOptions& options, const AosrConfig& config,
                              const std::function<void(const SweepRow&)>& on_row) {
  require(!options.sizes.empty(), "sweep needs at least one size");
  for (std::size_t i = 0; i < options.sizes.size(); ++i) {
    require(options.sizes[i] >= 4 && options.sizes[i] % 2 == 0, "sweep sizes must be even and at least 4");
    if (i > 0) require(options.sizes[i] > options.sizes[i - 1], "sweep sizes must be strictly ascending");
  }
  require(options.trials >= 1, "sweep needs at least one trial");

  SweepResult result;
  for (long n : options.sizes) {
    for (int trial = 0; trial < options.trials; ++trial) {
      const std::uint64_t seed =
          splitmix64(options.seed ^ splitmix64(static_cast<std::uint64_t>(n) * 7919ULL + static_cast<std::uint64_t>(trial)));
      MoonTrial outcome;
      try {
        outcome = run_moon_trial(config, n, options.noise, seed);
      } catch (const Error& e) {
        throw e.with_context("sweep n=" + std::to_string(n) + " trial=" + std::to_string(trial));
      }
      const double root = std::sqrt(static_cast<double>(n));
      SweepRow row{n, trial, 1.0 - outcome.accuracy, 0.5 / root, 8.0 / root};
      result.rows.push_back(row);
      if (on_row) on_row(row);
    }
  }
  return result;
}

}  // namespace aosr
