#include "aosr/mlp.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "aosr/csv.hpp"
#include "aosr/error.hpp"
#include "aosr/serialize.hpp"

namespace aosr {

bool DenseLayer::operator==(const DenseLayer& other) const {
  return weights.rows() == other.weights.rows() && weights.cols() == other.weights.cols() &&
         bias.size() == other.bias.size() && weights == other.weights && bias == other.bias;
}

int MlpModel::encoding_dim() const {
  require(dims.size() >= 3, "model has no hidden layer");
  return dims[dims.size() - 2];
}

std::size_t MlpModel::num_parameters() const {
  std::size_t total = 0;
  for (const auto& layer : layers) total += static_cast<std::size_t>(layer.weights.size() + layer.bias.size());
  return total;
}

void MlpModel::validate() const {
  require(dims.size() >= 2, "model: at least input and output dims required");
  require(layers.size() == dims.size() - 1, "model: layer count does not match dims");
  for (int d : dims) require(d >= 1, "model: dims must be positive");
  for (std::size_t l = 0; l < layers.size(); ++l) {
    const auto& layer = layers[l];
    require(layer.weights.rows() == dims[l + 1] && layer.weights.cols() == dims[l],
            "model: layer " + std::to_string(l) + " weight shape mismatch");
    require(layer.bias.size() == dims[l + 1], "model: layer " + std::to_string(l) + " bias size mismatch");
    require(layer.weights.allFinite() && layer.bias.allFinite(),
            "model: layer " + std::to_string(l) + " has non-finite parameters");
  }
}

MlpModel mlp_init(const std::vector<int>& dims, Rng& rng) {
  require(dims.size() >= 2, "mlp_init: at least two dims required");
  for (int d : dims) require(d >= 1, "mlp_init: dims must be positive");
  MlpModel model;
  model.dims = dims;
  for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
    DenseLayer layer;
    const double scale = std::sqrt(2.0 / dims[l]);
    layer.weights.resize(dims[l + 1], dims[l]);
    for (Eigen::Index i = 0; i < layer.weights.rows(); ++i) {
      for (Eigen::Index j = 0; j < layer.weights.cols(); ++j) layer.weights(i, j) = scale * rng.normal();
    }
    layer.bias = Eigen::VectorXd::Zero(dims[l + 1]);
    model.layers.push_back(std::move(layer));
  }
  return model;
}

namespace {

void check_input(const MlpModel& model, Eigen::Index cols) {
  require(cols == model.input_dim(), "model expects " + std::to_string(model.input_dim()) + " inputs, got " +
                                         std::to_string(cols));
}

Eigen::MatrixXd affine(const DenseLayer& layer, const Eigen::MatrixXd& a) {
  Eigen::MatrixXd z = a * layer.weights.transpose();
  z.rowwise() += layer.bias.transpose();
  return z;
}

void softmax_rows(Eigen::MatrixXd& z) {
  for (Eigen::Index i = 0; i < z.rows(); ++i) {
    auto row = z.row(i);
    row.array() -= row.maxCoeff();
    row = row.array().exp();
    row /= row.sum();
  }
}

// Pre-activations of every layer for a batch.
std::vector<Eigen::MatrixXd> forward_trace(const MlpModel& model, const Eigen::MatrixXd& x) {
  std::vector<Eigen::MatrixXd> pre;
  pre.reserve(model.layers.size());
  Eigen::MatrixXd a = x;
  for (std::size_t l = 0; l < model.layers.size(); ++l) {
    pre.push_back(affine(model.layers[l], a));
    if (l + 1 < model.layers.size()) a = pre.back().cwiseMax(0.0);
  }
  return pre;
}

}  // namespace

Eigen::MatrixXd logits(const MlpModel& model, const Eigen::MatrixXd& x) {
  check_input(model, x.cols());
  Eigen::MatrixXd a = x;
  for (std::size_t l = 0; l < model.layers.size(); ++l) {
    a = affine(model.layers[l], a);
    if (l + 1 < model.layers.size()) a = a.cwiseMax(0.0);
  }
  return a;
}

Eigen::MatrixXd forward(const MlpModel& model, const Eigen::MatrixXd& x) {
  Eigen::MatrixXd z = logits(model, x);
  softmax_rows(z);
  return z;
}

Eigen::VectorXd forward(const MlpModel& model, const Eigen::VectorXd& x) {
  return forward(model, Eigen::MatrixXd(x.transpose())).row(0).transpose();
}

Eigen::MatrixXd encode(const MlpModel& model, const Eigen::MatrixXd& x) {
  require(model.dims.size() >= 3, "encode: model has no hidden layer");
  check_input(model, x.cols());
  Eigen::MatrixXd a = x;
  for (std::size_t l = 0; l + 1 < model.layers.size(); ++l) a = affine(model.layers[l], a).cwiseMax(0.0);
  return a;
}

Eigen::VectorXd encode(const MlpModel& model, const Eigen::VectorXd& x) {
  return encode(model, Eigen::MatrixXd(x.transpose())).row(0).transpose();
}

double weighted_cross_entropy(const Eigen::Ref<const Eigen::VectorXd>& probs, int target, double weight) {
  require(target >= 0 && target < probs.size(), "weighted_cross_entropy: target " + std::to_string(target) +
                                                     " outside output width " + std::to_string(probs.size()));
  require(weight >= 0.0, "weighted_cross_entropy: weight must be nonnegative");
  if (weight == 0.0) return 0.0;
  return weight * -std::log(std::max(probs[target], kProbabilityFloor));
}

int argmax_lowest(const Eigen::Ref<const Eigen::RowVectorXd>& row) {
  Eigen::Index best = 0;
  for (Eigen::Index k = 1; k < row.size(); ++k) {
    if (row[k] > row[best]) best = k;
  }
  return static_cast<int>(best);
}

int predict(const MlpModel& model, const Eigen::VectorXd& x) {
  return argmax_lowest(forward(model, x).transpose());
}

std::vector<int> predict(const MlpModel& model, const Eigen::MatrixXd& x) {
  const Eigen::MatrixXd p = forward(model, x);
  std::vector<int> out(static_cast<std::size_t>(p.rows()));
  for (Eigen::Index i = 0; i < p.rows(); ++i) out[static_cast<std::size_t>(i)] = argmax_lowest(p.row(i));
  return out;
}

void TrainingSet::validate(int input_dim, int output_dim) const {
  require(features.rows() >= 1, "training set: no samples");
  require(features.cols() == input_dim, "training set: feature width " + std::to_string(features.cols()) +
                                            " does not match model input " + std::to_string(input_dim));
  require(static_cast<Eigen::Index>(targets.size()) == features.rows() && weights.size() == features.rows(),
          "training set: targets/weights length mismatch");
  for (int y : targets) require(y >= 0 && y < output_dim, "training set: target outside output width");
  require((weights.array() >= 0.0).all() && weights.allFinite(), "training set: weights must be finite and >= 0");
}

LossGradient loss_and_gradient(const MlpModel& model, const Eigen::MatrixXd& x, const std::vector<int>& targets,
                               const Eigen::VectorXd& weights) {
  check_input(model, x.cols());
  const std::size_t depth = model.layers.size();
  const auto pre = forward_trace(model, x);

  Eigen::MatrixXd delta = pre.back();
  softmax_rows(delta);
  LossGradient out;
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    const int y = targets[static_cast<std::size_t>(i)];
    const double w = weights[i];
    const double p = delta(i, y);
    if (w == 0.0 || p < kProbabilityFloor) {
      // Zero weight, or the clamp is active and the loss is locally constant.
      if (w != 0.0) out.loss += w * -std::log(kProbabilityFloor);
      delta.row(i).setZero();
      continue;
    }
    out.loss += w * -std::log(p);
    delta(i, y) -= 1.0;
    delta.row(i) *= w;
  }

  out.grads.resize(depth);
  for (std::size_t l = depth; l-- > 0;) {
    const Eigen::MatrixXd input = l == 0 ? x : Eigen::MatrixXd(pre[l - 1].cwiseMax(0.0));
    out.grads[l].weights = delta.transpose() * input;
    out.grads[l].bias = delta.colwise().sum().transpose();
    if (l > 0) {
      Eigen::MatrixXd back = delta * model.layers[l].weights;
      delta = (pre[l - 1].array() > 0.0).select(back, 0.0);
    }
  }
  return out;
}

double weighted_loss(const MlpModel& model, const TrainingSet& data) {
  const Eigen::MatrixXd p = forward(model, data.features);
  double total = 0.0;
  for (Eigen::Index i = 0; i < p.rows(); ++i) {
    total += weighted_cross_entropy(p.row(i).transpose(), data.targets[static_cast<std::size_t>(i)], data.weights[i]);
  }
  return total;
}

void TrainConfig::validate() const {
  require(epochs >= 1, "train config: epochs must be >= 1");
  require(batch_size >= 1, "train config: batch size must be >= 1");
  require(learning_rate >= 0.0 && std::isfinite(learning_rate), "train config: learning rate must be >= 0");
  require(clip_norm >= 0.0, "train config: clip norm must be >= 0");
}

namespace {

struct AdamState {
  std::vector<DenseLayer> m;
  std::vector<DenseLayer> v;
  long step = 0;
};

std::vector<DenseLayer> zeros_like(const MlpModel& model) {
  std::vector<DenseLayer> out;
  for (const auto& layer : model.layers) {
    out.push_back({Eigen::MatrixXd::Zero(layer.weights.rows(), layer.weights.cols()),
                   Eigen::VectorXd::Zero(layer.bias.size())});
  }
  return out;
}

double squared_norm(const std::vector<DenseLayer>& grads) {
  double total = 0.0;
  for (const auto& g : grads) total += g.weights.squaredNorm() + g.bias.squaredNorm();
  return total;
}

[[noreturn]] void diverged(int epoch, const std::string& what) {
  throw Error(ErrorKind::divergence, "training diverged in epoch " + std::to_string(epoch) + ": " + what);
}

}  // namespace

TrainResult train(MlpModel model, TrainingSet data, const TrainConfig& config, const EpochHook& hook) {
  config.validate();
  model.validate();
  data.validate(model.input_dim(), model.output_dim());

  constexpr double kBeta1 = 0.9;
  constexpr double kBeta2 = 0.999;
  constexpr double kEps = 1e-8;

  const Eigen::Index n = data.size();
  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  Rng rng(config.seed, 0x7472616EULL);
  AdamState adam{zeros_like(model), zeros_like(model), 0};

  TrainResult result;
  result.loss_trace.reserve(static_cast<std::size_t>(config.epochs));

  Eigen::MatrixXd batch_x;
  std::vector<int> batch_y;
  Eigen::VectorXd batch_w;
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    if (hook) {
      hook(epoch, model, data.weights);
      require(data.weights.size() == n && (data.weights.array() >= 0.0).all(),
              "train: epoch hook produced invalid weights");
    }
    if (epoch == 0) result.initial_loss = weighted_loss(model, data);

    for (Eigen::Index i = n - 1; i > 0; --i) {
      const auto j = static_cast<Eigen::Index>(rng.below(static_cast<std::uint64_t>(i + 1)));
      std::swap(order[static_cast<std::size_t>(i)], order[static_cast<std::size_t>(j)]);
    }

    for (Eigen::Index start = 0; start < n; start += config.batch_size) {
      const Eigen::Index len = std::min<Eigen::Index>(config.batch_size, n - start);
      batch_x.resize(len, data.features.cols());
      batch_y.resize(static_cast<std::size_t>(len));
      batch_w.resize(len);
      for (Eigen::Index b = 0; b < len; ++b) {
        const Eigen::Index r = order[static_cast<std::size_t>(start + b)];
        batch_x.row(b) = data.features.row(r);
        batch_y[static_cast<std::size_t>(b)] = data.targets[static_cast<std::size_t>(r)];
        batch_w[b] = data.weights[r];
      }
      auto lg = loss_and_gradient(model, batch_x, batch_y, batch_w);
      const double scale = static_cast<double>(n) / static_cast<double>(len);
      for (auto& g : lg.grads) {
        g.weights *= scale;
        g.bias *= scale;
      }
      const double norm = std::sqrt(squared_norm(lg.grads));
      if (!std::isfinite(norm) || !std::isfinite(lg.loss)) diverged(epoch, "non-finite loss or gradient");
      if (config.clip_norm > 0.0 && norm > config.clip_norm) {
        const double shrink = config.clip_norm / norm;
        for (auto& g : lg.grads) {
          g.weights *= shrink;
          g.bias *= shrink;
        }
      }

      if (config.optimizer == Optimizer::sgd) {
        for (std::size_t l = 0; l < model.layers.size(); ++l) {
          model.layers[l].weights -= config.learning_rate * lg.grads[l].weights;
          model.layers[l].bias -= config.learning_rate * lg.grads[l].bias;
        }
      } else {
        ++adam.step;
        const double c1 = 1.0 - std::pow(kBeta1, static_cast<double>(adam.step));
        const double c2 = 1.0 - std::pow(kBeta2, static_cast<double>(adam.step));
        const double step = config.learning_rate * std::sqrt(c2) / c1;
        for (std::size_t l = 0; l < model.layers.size(); ++l) {
          auto& m = adam.m[l];
          auto& v = adam.v[l];
          const auto& g = lg.grads[l];
          m.weights = kBeta1 * m.weights + (1.0 - kBeta1) * g.weights;
          m.bias = kBeta1 * m.bias + (1.0 - kBeta1) * g.bias;
          v.weights = kBeta2 * v.weights + (1.0 - kBeta2) * g.weights.cwiseAbs2();
          v.bias = kBeta2 * v.bias + (1.0 - kBeta2) * g.bias.cwiseAbs2();
          model.layers[l].weights.array() -= step * m.weights.array() / (v.weights.array().sqrt() + kEps);
          model.layers[l].bias.array() -= step * m.bias.array() / (v.bias.array().sqrt() + kEps);
        }
      }
    }

    const double epoch_loss = weighted_loss(model, data);
    if (!std::isfinite(epoch_loss)) diverged(epoch, "non-finite epoch loss");
    result.loss_trace.push_back(epoch_loss);
  }
  result.model = std::move(model);
  return result;
}

std::string model_to_json(const MlpModel& model) { return model_json(model).dump(); }

MlpModel model_from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::parse, std::string("model file is not valid JSON: ") + e.what());
  }
  return model_from_json_value(j);
}

void save_model(const MlpModel& model, const std::filesystem::path& path) {
  write_file_atomic(path, model_to_json(model) + "\n");
}

MlpModel load_model(const std::filesystem::path& path) {
  try {
    return model_from_json(read_file(path));
  } catch (const Error& e) {
    throw e.with_context(path.string());
  }
}

}  // namespace aosr
