#pragma once

#include <json.hpp>

#include "aosr/dataset.hpp"
#include "aosr/mlp.hpp"

namespace aosr {

/// {version, dims, activation, layers: [{w: [[..]], b: [..]}]}
nlohmann::json model_json(const MlpModel& model);
MlpModel model_from_json_value(const nlohmann::json& j);

nlohmann::json box_json(const Box& box);
Box box_from_json(const nlohmann::json& j);

}  // namespace aosr
