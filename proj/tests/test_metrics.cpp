#include <doctest.h>

#include <numeric>

#include "aosr/error.hpp"
#include "aosr/metrics.hpp"
#include "aosr/rng.hpp"

using namespace aosr;

namespace {

/// Direct per-class computation from the label lists.
double brute_macro_f1(const std::vector<int>& y, const std::vector<int>& p, int k) {
  double total = 0.0;
  for (int c = 0; c < k; ++c) {
    int tp = 0, fp = 0, fn = 0;
    for (std::size_t i = 0; i < y.size(); ++i) {
      if (y[i] == c && p[i] == c) ++tp;
      if (y[i] != c && p[i] == c) ++fp;
      if (y[i] == c && p[i] != c) ++fn;
    }
    const double precision = tp + fp == 0 ? 0.0 : static_cast<double>(tp) / (tp + fp);
    const double recall = tp + fn == 0 ? 0.0 : static_cast<double>(tp) / (tp + fn);
    total += precision + recall == 0.0 ? 0.0 : 2 * precision * recall / (precision + recall);
  }
  return total / k;
}

}  // namespace

TEST_SUITE("metrics") {
  TEST_CASE("confusion and accuracy") {
    const ConfusionMatrix perfect = confusion({0, 1, 2, 1}, {0, 1, 2, 1}, 3);
    CHECK(accuracy(perfect) == 1.0);
    CHECK(perfect.at(1, 1) == 2);
    CHECK(perfect.at(0, 1) == 0);
    CHECK(macro_f1(perfect) == 1.0);

    const ConfusionMatrix zeros = confusion({0, 1, 0, 1}, {0, 0, 0, 0}, 2);
    CHECK(accuracy(zeros) == 0.5);
    CHECK(zeros.row_sum(0) == 2);
    CHECK(zeros.row_sum(1) == 2);
    CHECK(zeros.col_sum(0) == 4);
    CHECK_THROWS_AS(confusion({0, 3}, {0, 0}, 3), Error);
    CHECK_THROWS_AS(confusion({0}, {0, 0}, 3), Error);
  }

  TEST_CASE("macro F1 examples") {
    ConfusionMatrix cm(2);
    cm.add(0, 0);
    cm.add(0, 1);
    cm.add(1, 0);
    cm.add(1, 1);
    CHECK(macro_f1(cm) == doctest::Approx(0.5));
    for (const auto& s : per_class_scores(cm)) {
      CHECK(s.precision == 0.5);
      CHECK(s.recall == 0.5);
    }

    const ConfusionMatrix absent = confusion({0, 1}, {0, 1}, 3);
    CHECK(macro_f1(absent) == doctest::Approx(2.0 / 3.0));
  }

  TEST_CASE("macro F1 agrees with a brute-force oracle") {
    Rng rng(12);
    for (int k = 0; k < 300; ++k) {
      const int classes = 2 + static_cast<int>(rng.below(4));
      const std::size_t n = 1 + rng.below(40);
      std::vector<int> y(n), p(n);
      for (std::size_t i = 0; i < n; ++i) {
        y[i] = static_cast<int>(rng.below(classes));
        p[i] = static_cast<int>(rng.below(classes));
      }
      const ConfusionMatrix cm = confusion(y, p, classes);
      CHECK(macro_f1(cm) == doctest::Approx(brute_macro_f1(y, p, classes)).epsilon(1e-14));
      for (int c = 0; c < classes; ++c) CHECK(cm.row_sum(c) == std::count(y.begin(), y.end(), c));

      std::vector<int> perm(classes);
      std::iota(perm.begin(), perm.end(), 0);
      for (int i = classes - 1; i > 0; --i) std::swap(perm[i], perm[rng.below(i + 1)]);
      std::vector<int> y2(n), p2(n);
      for (std::size_t i = 0; i < n; ++i) {
        y2[i] = perm[y[i]];
        p2[i] = perm[p[i]];
      }
      const ConfusionMatrix cm2 = confusion(y2, p2, classes);
      CHECK(macro_f1(cm2) == doctest::Approx(macro_f1(cm)).epsilon(1e-14));
      CHECK(accuracy(cm2) == accuracy(cm));
      const double error = static_cast<double>(cm.total() - cm.trace()) / static_cast<double>(cm.total());
      CHECK(accuracy(cm) + error == 1.0);
    }
  }

  TEST_CASE("report") {
    const std::string json = evaluation_report_json(confusion({0, 1, 2}, {0, 2, 2}, 3));
    CHECK(json.find("\"accuracy\"") != std::string::npos);
    CHECK(json.find("\"macro_f1\"") != std::string::npos);
    CHECK(json.find("\"confusion\"") != std::string::npos);
  }
}
