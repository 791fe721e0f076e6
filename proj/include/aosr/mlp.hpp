#pragma once

#include <Eigen/Dense>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "aosr/rng.hpp"

namespace aosr {

struct DenseLayer {
  Eigen::MatrixXd weights;  ///< out x in
  Eigen::VectorXd bias;     ///< out

  bool operator==(const DenseLayer& other) const;
};

/// Fully connected network: rectifier on hidden layers, softmax on the output.
struct MlpModel {
  std::vector<int> dims;  ///< input, hidden..., output
  std::vector<DenseLayer> layers;

  int input_dim() const { return dims.front(); }
  int output_dim() const { return dims.back(); }
  std::size_t num_hidden() const { return dims.size() - 2; }
  /// Width of the last hidden layer.
  int encoding_dim() const;
  std::size_t num_parameters() const;

  /// Shape chain and finiteness check.
  void validate() const;
  bool operator==(const MlpModel& other) const = default;
};

inline constexpr int kModelFormatVersion = 1;
inline constexpr double kProbabilityFloor = 1e-12;

/// He initialization: weights ~ N(0, 2 / fan_in), zero biases.
MlpModel mlp_init(const std::vector<int>& dims, Rng& rng);

/// Row-wise softmax probabilities for a batch (one sample per row).
Eigen::MatrixXd forward(const MlpModel& model, const Eigen::MatrixXd& x);
Eigen::VectorXd forward(const MlpModel& model, const Eigen::VectorXd& x);

Eigen::MatrixXd logits(const MlpModel& model, const Eigen::MatrixXd& x);

/// Post-activation values of the last hidden layer.
Eigen::MatrixXd encode(const MlpModel& model, const Eigen::MatrixXd& x);
Eigen::VectorXd encode(const MlpModel& model, const Eigen::VectorXd& x);

/// weight * -log(max(p_target, 1e-12)).
double weighted_cross_entropy(const Eigen::Ref<const Eigen::VectorXd>& probs, int target, double weight);

/// Argmax with lowest-index tie-break.
int predict(const MlpModel& model, const Eigen::VectorXd& x);
std::vector<int> predict(const MlpModel& model, const Eigen::MatrixXd& x);
int argmax_lowest(const Eigen::Ref<const Eigen::RowVectorXd>& row);

/// Samples with per-sample loss weights; the training objective is sum_i w_i l_i.
struct TrainingSet {
  Eigen::MatrixXd features;
  std::vector<int> targets;
  Eigen::VectorXd weights;

  Eigen::Index size() const { return features.rows(); }
  void validate(int input_dim, int output_dim) const;
};

/// sum_i w_i l_i and its gradient with respect to every layer parameter.
struct LossGradient {
  double loss = 0.0;
  std::vector<DenseLayer> grads;
};
LossGradient loss_and_gradient(const MlpModel& model, const Eigen::MatrixXd& x, const std::vector<int>& targets,
                               const Eigen::VectorXd& weights);

/// sum_i w_i l_i over the whole set.
double weighted_loss(const MlpModel& model, const TrainingSet& data);

enum class Optimizer { sgd, adam };

struct TrainConfig {
  int epochs = 200;
  int batch_size = 64;
  double learning_rate = 1e-3;
  Optimizer optimizer = Optimizer::adam;
  std::uint64_t seed = 0;
  double clip_norm = 10.0;  ///< global gradient norm cap; 0 disables

  void validate() const;
};

/// Called at the start of each epoch; may rewrite the sample weights.
using EpochHook = std::function<void(int epoch, const MlpModel& model, Eigen::VectorXd& weights)>;

struct TrainResult {
  MlpModel model;
  double initial_loss = 0.0;       ///< objective before the first step
  std::vector<double> loss_trace;  ///< objective after each epoch, under that epoch's weights
};

/// Mini-batch training with seeded shuffling. Batch gradients are scaled by
/// N / |batch| so each step estimates the gradient of the full objective.
TrainResult train(MlpModel model, TrainingSet data, const TrainConfig& config, const EpochHook& hook = {});

std::string model_to_json(const MlpModel& model);
MlpModel model_from_json(const std::string& text);
void save_model(const MlpModel& model, const std::filesystem::path& path);
MlpModel load_model(const std::filesystem::path& path);

}  // namespace aosr
