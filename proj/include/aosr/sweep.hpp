#pragma once

#include <functional>
#include <string>
#include <vector>

#include "aosr/pipeline.hpp"

namespace aosr {

struct SweepRow {
  long n = 0;
  int trial = 0;
  double error = 0.0;
  double bound_low = 0.0;   ///< 0.5 / sqrt(n)
  double bound_high = 0.0;  ///< 8 / sqrt(n)
};

struct SweepSummary {
  long n = 0;
  double mean_error = 0.0;
  double stderr_error = 0.0;  ///< sample standard deviation / sqrt(trials); 0 for one trial
  double median_error = 0.0;
};

struct SweepResult {
  std::vector<SweepRow> rows;

  std::vector<SweepSummary> summary() const;
  std::string rows_csv() const;     ///< n,trial,error,bound_low,bound_high
  std::string summary_csv() const;  ///< n,mean_error,stderr
};

struct SweepOptions {
  std::vector<long> sizes;
  int trials = 1;
  double noise = 0.1;
  std::uint64_t seed = 0;
};

/// Outcome of one trained model on a fresh mixed test set.
struct MoonTrial {
  double accuracy = 0.0;
  std::vector<int> truth;
  std::vector<int> predicted;
};

/// Trains on n double-moon samples (n even) and tests on n/2 known plus the
/// remaining unknown samples, all drawn from `seed`. An odd n/2 rounds down.
MoonTrial run_moon_trial(const AosrConfig& config, long n, double noise, std::uint64_t seed);

/// Error = 1 - accuracy for each (n, trial). `on_row` sees rows as they finish.
SweepResult sweep_error_curve(const SweepOptions& options, const AosrConfig& config,
                              const std::function<void(const SweepRow&)>& on_row = {});

}  // namespace aosr
