#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace aosr {

/// Counts with rows = true class, cols = predicted class.
class ConfusionMatrix {
 public:
  explicit ConfusionMatrix(int num_classes);

  int num_classes() const noexcept { return k_; }
  std::int64_t at(int truth, int predicted) const;
  void add(int truth, int predicted, std::int64_t count = 1);
  std::int64_t total() const noexcept { return total_; }
  std::int64_t row_sum(int truth) const;
  std::int64_t col_sum(int predicted) const;
  std::int64_t trace() const;

  bool operator==(const ConfusionMatrix& other) const = default;

 private:
  int k_;
  std::vector<std::int64_t> counts_;
  std::int64_t total_ = 0;
};

ConfusionMatrix confusion(const std::vector<int>& y_true, const std::vector<int>& y_pred, int num_classes);

/// trace / total; 0 for an empty matrix.
double accuracy(const ConfusionMatrix& cm);

struct ClassScores {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

/// Precision and recall are 0 when their denominator is 0; so is F1 when P + R = 0.
std::vector<ClassScores> per_class_scores(const ConfusionMatrix& cm);

/// Unweighted mean of per-class F1 over all classes, including empty ones.
double macro_f1(const ConfusionMatrix& cm);

/// {accuracy, macro_f1, confusion, per_class: [{precision, recall, f1}]}
std::string evaluation_report_json(const ConfusionMatrix& cm);

}  // namespace aosr
