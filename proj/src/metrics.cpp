#include "aosr/metrics.hpp"

#include <json.hpp>

#include "aosr/error.hpp"

namespace aosr {

ConfusionMatrix::ConfusionMatrix(int num_classes) : k_(num_classes) {
  require(num_classes >= 1, "confusion matrix needs at least one class");
  counts_.assign(static_cast<std::size_t>(k_) * static_cast<std::size_t>(k_), 0);
}

std::int64_t ConfusionMatrix::at(int truth, int predicted) const {
  require(truth >= 0 && truth < k_ && predicted >= 0 && predicted < k_, "confusion index out of range");
  return counts_[static_cast<std::size_t>(truth) * k_ + predicted];
}

void ConfusionMatrix::add(int truth, int predicted, std::int64_t count) {
  require(truth >= 0 && truth < k_, "true label " + std::to_string(truth) + " out of range");
  require(predicted >= 0 && predicted < k_, "predicted label " + std::to_string(predicted) + " out of range");
  require(count >= 0, "counts must be nonnegative");
  counts_[static_cast<std::size_t>(truth) * k_ + predicted] += count;
  total_ += count;
}

std::int64_t ConfusionMatrix::row_sum(int truth) const {
  std::int64_t s = 0;
  for (int j = 0; j < k_; ++j) s += at(truth, j);
  return s;
}

std::int64_t ConfusionMatrix::col_sum(int predicted) const {
  std::int64_t s = 0;
  for (int i = 0; i < k_; ++i) s += at(i, predicted);
  return s;
}

std::int64_t ConfusionMatrix::trace() const {
  std::int64_t s = 0;
  for (int i = 0; i < k_; ++i) s += at(i, i);
  return s;
}

ConfusionMatrix confusion(const std::vector<int>& y_true, const std::vector<int>& y_pred, int num_classes) {
  require(y_true.size() == y_pred.size(), "label vectors differ in length");
  ConfusionMatrix cm(num_classes);
  for (std::size_t i = 0; i < y_true.size(); ++i) cm.add(y_true[i], y_pred[i]);
  return cm;
}

double accuracy(const ConfusionMatrix& cm) {
  if (cm.total() == 0) return 0.0;
  return static_cast<double>(cm.trace()) / static_cast<double>(cm.total());
}

std::vector<ClassScores> per_class_scores(const ConfusionMatrix& cm) {
  std::vector<ClassScores> scores(static_cast<std::size_t>(cm.num_classes()));
  for (int c = 0; c < cm.num_classes(); ++c) {
    const auto tp = static_cast<double>(cm.at(c, c));
    const auto predicted = static_cast<double>(cm.col_sum(c));
    const auto support = static_cast<double>(cm.row_sum(c));
    auto& s = scores[static_cast<std::size_t>(c)];
    s.precision = predicted > 0 ? tp / predicted : 0.0;
    s.recall = support > 0 ? tp / support : 0.0;
    s.f1 = s.precision + s.recall > 0 ? 2.0 * s.precision * s.recall / (s.precision + s.recall) : 0.0;
  }
  return scores;
}

double macro_f1(const ConfusionMatrix& cm) {
  double sum = 0.0;
  for (const auto& s : per_class_scores(cm)) sum += s.f1;
  return sum / cm.num_classes();
}

std::string evaluation_report_json(const ConfusionMatrix& cm) {
  nlohmann::json j;
  j["accuracy"] = accuracy(cm);
  j["macro_f1"] = macro_f1(cm);
  j["total"] = cm.total();
  nlohmann::json rows = nlohmann::json::array();
  for (int i = 0; i < cm.num_classes(); ++i) {
    nlohmann::json row = nlohmann::json::array();
    for (int k = 0; k < cm.num_classes(); ++k) row.push_back(cm.at(i, k));
    rows.push_back(row);
  }
  j["confusion"] = rows;
  nlohmann::json classes = nlohmann::json::array();
  for (const auto& s : per_class_scores(cm)) {
    classes.push_back({{"precision", s.precision}, {"recall", s.recall}, {"f1", s.f1}});
  }
  j["per_class"] = classes;
  return j.dump(1);
}

}  // namespace aosr
