#pragma once

#include <Eigen/Dense>
#include <filesystem>
#include <string>
#include <vector>

#include "aosr/dataset.hpp"
#include "aosr/mlp.hpp"
#include "aosr/reweight.hpp"
#include "aosr/rng.hpp"

namespace aosr {

enum class WeightMethod { iforest, kulsif };

std::string to_string(WeightMethod method);
WeightMethod weight_method_from_string(const std::string& name);

struct AosrConfig {
  TrainConfig closed_train;
  TrainConfig open_train;
  std::vector<int> closed_hidden{64, 64};
  std::vector<int> open_hidden{64, 64};
  int aux_multiple = 3;  ///< m = aux_multiple * n
  double box_margin = 0.2;
  WeightMethod weight_method = WeightMethod::iforest;
  double beta = 0.05;
  double t = 0.10;
  bool recompute_mu_each_epoch = true;
  int iforest_trees = 100;
  int iforest_subsample = 256;
  double kulsif_lambda = 1e-2;
  std::uint64_t seed = 0;

  void validate() const;
};

struct AosrModel {
  MlpModel closed_model;  ///< encoder: its last hidden layer is the feature map
  MlpModel open_model;    ///< C+1 head over the encoded space
  WeightParams params;
  Box box;

  int num_known_classes() const { return open_model.output_dim() - 1; }
  void validate() const;
};

/// Step 1: closed-set classifier on S (per-sample weight 1/n).
struct ClosedTraining {
  MlpModel model;
  double train_accuracy = 0.0;
  std::vector<double> loss_trace;
};
ClosedTraining pretrain_closed(const AosrConfig& config, const Dataset& s);

/// Step 2a: features replaced by the closed model's last hidden activations.
Dataset encode_dataset(const MlpModel& closed_model, const Dataset& s);

/// Step 2b: multiple * n uniform samples over the margin-expanded bounding box.
struct AuxSample {
  FeatureMatrix samples;
  Box box;
};
AuxSample generate_aux(const Dataset& encoded, int multiple, double margin, Rng& rng);

/// Step 3: weights over T from S (iForest fit on S, or KuLSIF over S and T).
struct WeightOptions {
  int iforest_trees = 100;
  int iforest_subsample = 256;
  double kulsif_lambda = 1e-2;
  double kulsif_sigma = 0.0;  ///< 0 selects the median heuristic over S and T
};
Eigen::VectorXd estimate_weights(WeightMethod method, const Eigen::MatrixXd& source, const Eigen::MatrixXd& aux,
                                 Rng& rng, const WeightOptions& options = {});

/// Steps 4-5: C+1 network trained on S (weight 1/n, own label) and T
/// (weight mu L-(w) / m, unknown label).
struct OpenTraining {
  MlpModel model;
  double initial_objective = 0.0;
  std::vector<double> objective_trace;  ///< objective after each epoch under that epoch's mu
  std::vector<double> mu_trace;         ///< mu used in each epoch
  std::vector<long> unknown_trace;      ///< n' at the start of each epoch
};
OpenTraining train_open(const AosrConfig& config, const Dataset& encoded, const Eigen::MatrixXd& aux,
                        const Eigen::VectorXd& weights, double tau, double beta);

/// Per-sample weights realizing R_S + mu R_u in the generic weighted trainer.
TrainingSet open_training_set(const Dataset& encoded, const Eigen::MatrixXd& aux, const Eigen::VectorXd& weights,
                              double tau, double beta, double mu);

struct AosrDiagnostics {
  double closed_train_accuracy = 0.0;
  Eigen::VectorXd aux_weights;
  Eigen::MatrixXd aux_samples;
  Dataset encoded;
  OpenTraining open;
};

struct AosrResult {
  AosrModel model;
  AosrDiagnostics diagnostics;
};

AosrResult run_aosr(const AosrConfig& config, const Dataset& s);

/// Encodes with the closed model, then classifies with the open head; C means unknown.
int aosr_predict(const AosrModel& model, const Eigen::VectorXd& x);
std::vector<int> aosr_predict(const AosrModel& model, const Eigen::MatrixXd& x);

std::string aosr_model_to_json(const AosrModel& model);
AosrModel aosr_model_from_json(const std::string& text);
void save_aosr_model(const AosrModel& model, const std::filesystem::path& path);
AosrModel load_aosr_model(const std::filesystem::path& path);

}  // namespace aosr
