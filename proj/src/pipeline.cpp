#include "aosr/pipeline.hpp"

#include <cmath>

#include "aosr/csv.hpp"
#include "aosr/error.hpp"
#include "aosr/iforest.hpp"
#include "aosr/kernel.hpp"
#include "aosr/kulsif.hpp"
#include "aosr/serialize.hpp"

namespace aosr {
namespace {

constexpr int kAosrFormatVersion = 1;

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t tag) { return splitmix64(seed ^ splitmix64(tag)); }

template <typename F>
auto with_step(const char* step, F&& body) {
  try {
    return body();
  } catch (const Error& e) {
    throw e.with_context(step);
  }
}

std::vector<int> chain(int input, const std::vector<int>& hidden, int output) {
  std::vector<int> dims{input};
  dims.insert(dims.end(), hidden.begin(), hidden.end());
  dims.push_back(output);
  return dims;
}

double accuracy_of(const MlpModel& model, const Dataset& s) {
  const auto pred = predict(model, s.features());
  long hits = 0;
  for (std::size_t i = 0; i < pred.size(); ++i) hits += pred[i] == s.labels()[i];
  return static_cast<double>(hits) / static_cast<double>(pred.size());
}

long count_predicted_unknown(const MlpModel& model, const Dataset& s) {
  const int unknown = s.num_known_classes();
  long count = 0;
  for (int p : predict(model, s.features())) count += p == unknown;
  return count;
}

}  // namespace

std::string to_string(WeightMethod method) { return method == WeightMethod::iforest ? "iforest" : "kulsif"; }

WeightMethod weight_method_from_string(const std::string& name) {
  if (name == "iforest") return WeightMethod::iforest;
  if (name == "kulsif") return WeightMethod::kulsif;
  throw Error(ErrorKind::invalid_argument, "unknown weight method '" + name + "' (expected iforest or kulsif)");
}

void AosrConfig::validate() const {
  closed_train.validate();
  open_train.validate();
  require(!closed_hidden.empty(), "closed network needs at least one hidden layer");
  require(!open_hidden.empty(), "open network needs at least one hidden layer");
  for (int h : closed_hidden) require(h >= 1, "hidden widths must be positive");
  for (int h : open_hidden) require(h >= 1, "hidden widths must be positive");
  require(aux_multiple >= 1, "aux multiple must be at least 1");
  require(std::isfinite(box_margin) && box_margin >= 0.0, "box margin must be nonnegative");
  require(std::isfinite(beta) && beta > 0.0, "beta must be positive");
  require(t > 0.0 && t < 1.0, "t must lie in (0, 1)");
  require(iforest_trees >= 1, "iforest trees must be positive");
  require(iforest_subsample >= 1, "iforest subsample must be positive");
  require(std::isfinite(kulsif_lambda) && kulsif_lambda > 0.0, "kulsif lambda must be positive");
}

void AosrModel::validate() const {
  closed_model.validate();
  open_model.validate();
  params.validate();
  require(open_model.input_dim() == closed_model.encoding_dim(),
          "open model input dim must equal the closed model encoding width");
  require(open_model.output_dim() == closed_model.output_dim() + 1, "open model must have C + 1 outputs");
  require(box.dim() == open_model.input_dim(), "feature box dim must match the encoded space");
}

ClosedTraining pretrain_closed(const AosrConfig& config, const Dataset& s) {
  config.validate();
  require(s.num_known_classes() >= 1, "at least one known class is required");
  require(s.is_training(), "training data must not contain unknown labels");
  require(s.size() >= 1, "training data is empty");

  Rng init_rng(derive_seed(config.seed, 1));
  MlpModel model = mlp_init(chain(static_cast<int>(s.dim()), config.closed_hidden, s.num_known_classes()), init_rng);

  const double w = 1.0 / static_cast<double>(s.size());
  TrainingSet data{s.features(), s.labels(), Eigen::VectorXd::Constant(s.size(), w)};
  TrainConfig tc = config.closed_train;
  tc.seed = derive_seed(config.seed, 2);
  TrainResult result = train(std::move(model), std::move(data), tc);

  ClosedTraining out;
  out.train_accuracy = accuracy_of(result.model, s);
  out.loss_trace = std::move(result.loss_trace);
  out.model = std::move(result.model);
  return out;
}

Dataset encode_dataset(const MlpModel& closed_model, const Dataset& s) {
  require(closed_model.input_dim() == s.dim(), "encoder input dim " + std::to_string(closed_model.input_dim()) +
                                                   " does not match data dim " + std::to_string(s.dim()));
  return Dataset(encode(closed_model, s.features()), s.labels(), s.num_known_classes());
}

AuxSample generate_aux(const Dataset& encoded, int multiple, double margin, Rng& rng) {
  require(multiple >= 1, "aux multiple must be at least 1");
  Box box = bounding_box(encoded.features(), margin);
  FeatureMatrix samples = sample_uniform_box(static_cast<Eigen::Index>(multiple) * encoded.size(), box, rng);
  return AuxSample{std::move(samples), std::move(box)};
}

Eigen::VectorXd estimate_weights(WeightMethod method, const Eigen::MatrixXd& source, const Eigen::MatrixXd& aux,
                                 Rng& rng, const WeightOptions& options) {
  require(source.rows() >= 1 && aux.rows() >= 1, "weight estimation needs nonempty S and T");
  require(source.cols() == aux.cols(), "S and T dims differ");
  if (method == WeightMethod::iforest) {
    const IforestModel forest = iforest_fit(source, options.iforest_trees, options.iforest_subsample, rng);
    return weights_from_iforest(forest, aux);
  }
  double sigma = options.kulsif_sigma;
  if (sigma <= 0.0) {
    Eigen::MatrixXd z(source.rows() + aux.rows(), source.cols());
    z << source, aux;
    sigma = median_bandwidth(z);
  }
  const KulsifModel model = kulsif_fit(source, aux, options.kulsif_lambda, sigma);
  return ratio_predict(model, aux);
}

TrainingSet open_training_set(const Dataset& encoded, const Eigen::MatrixXd& aux, const Eigen::VectorXd& weights,
                              double tau, double beta, double mu) {
  require(aux.cols() == encoded.dim(), "T dim does not match encoded S");
  require(weights.size() == aux.rows(), "one weight per auxiliary sample required");
  const Eigen::Index n = encoded.size();
  const Eigen::Index m = aux.rows();
  const int unknown = encoded.num_known_classes();

  TrainingSet data;
  data.features.resize(n + m, encoded.dim());
  data.features << encoded.features(), aux;
  data.targets = encoded.labels();
  data.targets.insert(data.targets.end(), static_cast<std::size_t>(m), unknown);
  data.weights.resize(n + m);
  data.weights.head(n).setConstant(1.0 / static_cast<double>(n));
  data.weights.tail(m) = l_minus_transform(weights, tau, beta) * (mu / static_cast<double>(m));
  return data;
}

OpenTraining train_open(const AosrConfig& config, const Dataset& encoded, const Eigen::MatrixXd& aux,
                        const Eigen::VectorXd& weights, double tau, double beta) {
  config.validate();
  require(std::isfinite(tau) && tau > 0.0, "tau must be positive");
  require(std::isfinite(beta) && beta > 0.0, "beta must be positive");
  const Eigen::Index n = encoded.size();
  const Eigen::Index m = aux.rows();
  const int classes = encoded.num_known_classes();

  // T weights are stored without mu; the epoch hook scales them.
  TrainingSet data = open_training_set(encoded, aux, weights, tau, beta, 1.0);
  const Eigen::VectorXd base_tail = data.weights.tail(m);

  Rng init_rng(derive_seed(config.seed, 5));
  MlpModel model = mlp_init(chain(static_cast<int>(encoded.dim()), config.open_hidden, classes + 1), init_rng);

  OpenTraining out;
  double fixed_mu = -1.0;
  auto set_mu = [&](const MlpModel& current, Eigen::VectorXd& w) {
    double mu = fixed_mu;
    long n_unknown = -1;
    if (config.recompute_mu_each_epoch || fixed_mu < 0.0) {
      n_unknown = count_predicted_unknown(current, encoded);
      mu = mu_schedule(n, beta, n_unknown);
      if (!config.recompute_mu_each_epoch) fixed_mu = mu;
    }
    w.tail(m) = base_tail * mu;
    out.mu_trace.push_back(mu);
    out.unknown_trace.push_back(n_unknown);
  };

  // The trainer's initial objective uses the weights it was handed, so fix them first.
  set_mu(model, data.weights);
  out.mu_trace.clear();
  out.unknown_trace.clear();

  TrainConfig tc = config.open_train;
  tc.seed = derive_seed(config.seed, 6);
  TrainResult result = train(std::move(model), std::move(data), tc,
                             [&](int, const MlpModel& current, Eigen::VectorXd& w) { set_mu(current, w); });
  out.initial_objective = result.initial_loss;
  out.objective_trace = std::move(result.loss_trace);
  out.model = std::move(result.model);
  return out;
}

AosrResult run_aosr(const AosrConfig& config, const Dataset& s) {
  with_step("config", [&] {
    config.validate();
    return 0;
  });
  if (s.num_known_classes() < 1) throw Error(ErrorKind::invalid_argument, "step 1 (closed training): C must be >= 1");

  ClosedTraining closed = with_step("step 1 (closed training)", [&] { return pretrain_closed(config, s); });
  Dataset encoded = with_step("step 2 (encoding)", [&] { return encode_dataset(closed.model, s); });

  Rng aux_rng(derive_seed(config.seed, 3));
  AuxSample aux = with_step("step 2 (auxiliary samples)",
                            [&] { return generate_aux(encoded, config.aux_multiple, config.box_margin, aux_rng); });

  Rng weight_rng(derive_seed(config.seed, 4));
  WeightOptions options;
  options.iforest_trees = config.iforest_trees;
  options.iforest_subsample = config.iforest_subsample;
  options.kulsif_lambda = config.kulsif_lambda;
  Eigen::VectorXd weights = with_step("step 3 (weight estimation)", [&] {
    return estimate_weights(config.weight_method, encoded.features(), aux.samples.values(), weight_rng, options);
  });

  WeightParams params;
  params.beta = config.beta;
  params.t = config.t;
  params.tau = with_step("step 4 (threshold)", [&] { return select_tau(weights, config.t); });
  params.u_zero_mass = estimate_u_zero_mass(weights, params.tau);

  OpenTraining open = with_step("step 5 (open training)", [&] {
    return train_open(config, encoded, aux.samples.values(), weights, params.tau, params.beta);
  });

  AosrResult result{AosrModel{closed.model, open.model, params, aux.box},
                    AosrDiagnostics{closed.train_accuracy, std::move(weights), aux.samples.values(), std::move(encoded),
                                    std::move(open)}};
  result.model.validate();
  return result;
}

int aosr_predict(const AosrModel& model, const Eigen::VectorXd& x) {
  return predict(model.open_model, encode(model.closed_model, x));
}

std::vector<int> aosr_predict(const AosrModel& model, const Eigen::MatrixXd& x) {
  require(x.cols() == model.closed_model.input_dim(), "query dim does not match the model input dim");
  return predict(model.open_model, encode(model.closed_model, x));
}

std::string aosr_model_to_json(const AosrModel& model) {
  nlohmann::json j;
  j["version"] = kAosrFormatVersion;
  j["closed_model"] = model_json(model.closed_model);
  j["open_model"] = model_json(model.open_model);
  j["tau"] = model.params.tau;
  j["beta"] = model.params.beta;
  j["t"] = model.params.t;
  j["u_zero_mass"] = model.params.u_zero_mass;
  j["box"] = box_json(model.box);
  return j.dump(1);
}

AosrModel aosr_model_from_json(const std::string& text) {
  try {
    const nlohmann::json j = nlohmann::json::parse(text);
    if (j.at("version").get<int>() != kAosrFormatVersion) {
      throw Error(ErrorKind::parse, "unsupported model version " + j.at("version").dump());
    }
    WeightParams params;
    params.tau = j.at("tau").get<double>();
    params.beta = j.at("beta").get<double>();
    params.t = j.at("t").get<double>();
    params.u_zero_mass = j.value("u_zero_mass", 0.0);
    AosrModel model{model_from_json_value(j.at("closed_model")), model_from_json_value(j.at("open_model")), params,
                    box_from_json(j.at("box"))};
    model.validate();
    return model;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::parse, std::string("corrupt model file: ") + e.what());
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::parse) throw;
    throw Error(ErrorKind::parse, std::string("corrupt model file: ") + e.what());
  }
}

void save_aosr_model(const AosrModel& model, const std::filesystem::path& path) {
  write_file_atomic(path, aosr_model_to_json(model));
}

AosrModel load_aosr_model(const std::filesystem::path& path) { return aosr_model_from_json(read_file(path)); }

}  // namespace aosr
