#include "aosr/serialize.hpp"

#include <string>

#include "aosr/error.hpp"

namespace aosr {

namespace {

constexpr const char* kActivation = "relu-softmax";

[[noreturn]] void corrupt(const std::string& what) { throw Error(ErrorKind::parse, "model file: " + what); }

Eigen::VectorXd vector_from(const nlohmann::json& j, const std::string& what) {
  if (!j.is_array()) corrupt(what + " is not an array");
  Eigen::VectorXd v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_number()) corrupt(what + " has a non-numeric entry");
    v[static_cast<Eigen::Index>(i)] = j[i].get<double>();
  }
  return v;
}

}  // namespace

nlohmann::json model_json(const MlpModel& model) {
  nlohmann::json layers = nlohmann::json::array();
  for (const auto& layer : model.layers) {
    nlohmann::json w = nlohmann::json::array();
    for (Eigen::Index i = 0; i < layer.weights.rows(); ++i) {
      nlohmann::json row = nlohmann::json::array();
      for (Eigen::Index k = 0; k < layer.weights.cols(); ++k) row.push_back(layer.weights(i, k));
      w.push_back(std::move(row));
    }
    nlohmann::json b = nlohmann::json::array();
    for (Eigen::Index i = 0; i < layer.bias.size(); ++i) b.push_back(layer.bias[i]);
    layers.push_back({{"w", std::move(w)}, {"b", std::move(b)}});
  }
  return {{"version", kModelFormatVersion}, {"dims", model.dims}, {"activation", kActivation}, {"layers", layers}};
}

MlpModel model_from_json_value(const nlohmann::json& j) {
  if (!j.is_object()) corrupt("top level is not an object");
  for (const char* key : {"version", "dims", "activation", "layers"}) {
    if (!j.contains(key)) corrupt(std::string("missing field '") + key + "'");
  }
  if (!j["version"].is_number_integer() || j["version"].get<int>() != kModelFormatVersion) {
    corrupt("unsupported version " + j["version"].dump() + " (expected " + std::to_string(kModelFormatVersion) + ")");
  }
  if (j["activation"] != kActivation) corrupt("unsupported activation " + j["activation"].dump());
  MlpModel model;
  try {
    model.dims = j["dims"].get<std::vector<int>>();
  } catch (const nlohmann::json::exception&) {
    corrupt("dims is not an integer list");
  }
  const auto& layers = j["layers"];
  if (!layers.is_array()) corrupt("layers is not an array");
  for (std::size_t l = 0; l < layers.size(); ++l) {
    const auto& lj = layers[l];
    if (!lj.is_object() || !lj.contains("w") || !lj.contains("b")) corrupt("layer " + std::to_string(l) + " malformed");
    const auto& w = lj["w"];
    if (!w.is_array() || w.empty()) corrupt("layer " + std::to_string(l) + " weights malformed");
    DenseLayer layer;
    const auto rows = static_cast<Eigen::Index>(w.size());
    const auto cols = static_cast<Eigen::Index>(w[0].is_array() ? w[0].size() : 0);
    layer.weights.resize(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i) {
      const Eigen::VectorXd row = vector_from(w[static_cast<std::size_t>(i)], "weight row");
      if (row.size() != cols) corrupt("ragged weight matrix in layer " + std::to_string(l));
      layer.weights.row(i) = row.transpose();
    }
    layer.bias = vector_from(lj["b"], "bias");
    model.layers.push_back(std::move(layer));
  }
  try {
    model.validate();
  } catch (const Error& e) {
    corrupt(e.what());
  }
  return model;
}

nlohmann::json box_json(const Box& box) {
  return {{"lower", std::vector<double>(box.lower.data(), box.lower.data() + box.lower.size())},
          {"upper", std::vector<double>(box.upper.data(), box.upper.data() + box.upper.size())}};
}

Box box_from_json(const nlohmann::json& j) {
  try {
    const auto lo = j.at("lower").get<std::vector<double>>();
    const auto hi = j.at("upper").get<std::vector<double>>();
    return Box(Eigen::Map<const Eigen::VectorXd>(lo.data(), static_cast<Eigen::Index>(lo.size())),
               Eigen::Map<const Eigen::VectorXd>(hi.data(), static_cast<Eigen::Index>(hi.size())));
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::parse, std::string("box: ") + e.what());
  }
}

}  // namespace aosr
