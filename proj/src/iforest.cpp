#include "aosr/iforest.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "aosr/error.hpp"

namespace aosr {

namespace {

constexpr double kEulerGamma = 0.5772156649;

int ceil_log2(int k) {
  int depth = 0;
  while ((1 << depth) < k) ++depth;
  return depth;
}

class TreeBuilder {
 public:
  TreeBuilder(const Eigen::MatrixXd& reference, int depth_limit, Rng& rng)
      : reference_(reference), depth_limit_(depth_limit), rng_(rng) {}

  IsolationTree build(std::vector<Eigen::Index> rows) {
    tree_.nodes.clear();
    grow(rows.begin(), rows.end(), 0);
    return std::move(tree_);
  }

 private:
  using Iter = std::vector<Eigen::Index>::iterator;

  int grow(Iter first, Iter last, int depth) {
    const int id = static_cast<int>(tree_.nodes.size());
    tree_.nodes.push_back(IsolationNode{});
    tree_.nodes[static_cast<std::size_t>(id)].size = static_cast<int>(last - first);
    tree_.nodes[static_cast<std::size_t>(id)].depth = depth;
    if (last - first <= 1 || depth >= depth_limit_) return id;

    std::vector<int> splittable;
    std::vector<std::pair<double, double>> ranges(static_cast<std::size_t>(reference_.cols()));
    for (Eigen::Index k = 0; k < reference_.cols(); ++k) {
      double lo = reference_(*first, k);
      double hi = lo;
      for (auto it = first; it != last; ++it) {
        lo = std::min(lo, reference_(*it, k));
        hi = std::max(hi, reference_(*it, k));
      }
      ranges[static_cast<std::size_t>(k)] = {lo, hi};
      if (hi > lo) splittable.push_back(static_cast<int>(k));
    }
    if (splittable.empty()) return id;

    const int dim = splittable[rng_.below(splittable.size())];
    const auto [lo, hi] = ranges[static_cast<std::size_t>(dim)];
    const double value = rng_.uniform(lo, hi);
    const Iter mid = std::partition(first, last, [&](Eigen::Index r) { return reference_(r, dim) < value; });

    const int left = grow(first, mid, depth + 1);
    const int right = grow(mid, last, depth + 1);
    auto& node = tree_.nodes[static_cast<std::size_t>(id)];
    node.split_dim = dim;
    node.split_value = value;
    node.left = left;
    node.right = right;
    return id;
  }

  const Eigen::MatrixXd& reference_;
  int depth_limit_;
  Rng& rng_;
  IsolationTree tree_;
};

}  // namespace

double average_path_length(double k) {
  if (k <= 1.0) return 0.0;
  const double harmonic = std::log(k - 1.0) + kEulerGamma;
  return 2.0 * harmonic - 2.0 * (k - 1.0) / k;
}

int IsolationTree::depth() const {
  int d = 0;
  for (const auto& node : nodes) d = std::max(d, node.depth);
  return d;
}

double IsolationTree::path_length(const Eigen::Ref<const Eigen::RowVectorXd>& x) const {
  const IsolationNode* node = &nodes.front();
  while (!node->is_leaf()) {
    node = &nodes[static_cast<std::size_t>(x[node->split_dim] < node->split_value ? node->left : node->right)];
  }
  return node->depth + average_path_length(node->size);
}

int IforestModel::depth_limit() const { return ceil_log2(subsample); }

IforestModel iforest_fit(const Eigen::MatrixXd& reference, int num_trees, int subsample, Rng& rng) {
  require(reference.rows() >= 1 && reference.cols() >= 1, "iforest_fit: empty reference set");
  require(reference.allFinite(), "iforest_fit: non-finite reference value");
  require(num_trees >= 1, "iforest_fit: tree count must be positive");
  require(subsample >= 1, "iforest_fit: subsample size must be positive");

  IforestModel model;
  model.dim = reference.cols();
  model.subsample = static_cast<int>(std::min<Eigen::Index>(subsample, reference.rows()));
  const int limit = model.depth_limit();
  model.trees.reserve(static_cast<std::size_t>(num_trees));

  const Rng forest_rng(rng.next_u64());
  std::vector<Eigen::Index> all(static_cast<std::size_t>(reference.rows()));
  for (int t = 0; t < num_trees; ++t) {
    Rng tree_rng = forest_rng.fork(static_cast<std::uint64_t>(t));
    std::iota(all.begin(), all.end(), Eigen::Index{0});
    // Partial Fisher-Yates: the first psi entries are a uniform subsample.
    for (std::size_t i = 0; i < static_cast<std::size_t>(model.subsample); ++i) {
      const std::size_t j = i + tree_rng.below(all.size() - i);
      std::swap(all[i], all[j]);
    }
    std::vector<Eigen::Index> rows(all.begin(), all.begin() + model.subsample);
    TreeBuilder builder(reference, limit, tree_rng);
    model.trees.push_back(builder.build(std::move(rows)));
  }
  return model;
}

Eigen::VectorXd iforest_anomaly_score(const IforestModel& model, const Eigen::MatrixXd& x) {
  require(!model.trees.empty(), "iforest_anomaly_score: empty forest");
  require(x.cols() == model.dim, "iforest_anomaly_score: expected " + std::to_string(model.dim) + " columns, got " +
                                     std::to_string(x.cols()));
  const double normalizer = average_path_length(model.subsample);
  Eigen::VectorXd scores(x.rows());
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    if (normalizer <= 0.0) {
      scores[i] = 0.5;
      continue;
    }
    double total = 0.0;
    for (const auto& tree : model.trees) total += tree.path_length(x.row(i));
    const double mean = total / static_cast<double>(model.trees.size());
    scores[i] = std::exp2(-mean / normalizer);
  }
  return scores;
}

Eigen::VectorXd weights_from_iforest(const IforestModel& model, const Eigen::MatrixXd& x) {
  return (1.0 - iforest_anomaly_score(model, x).array()).matrix();
}

}  // namespace aosr
