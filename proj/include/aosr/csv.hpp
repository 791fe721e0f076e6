#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>

#include "aosr/dataset.hpp"

namespace aosr {

/// Decimal rendering with 17 significant digits; parses back to the same double.
std::string format_double(double value);

/// Writes `content` to a sibling temporary file, then renames it over `path`.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);
std::string read_file(const std::filesystem::path& path);

enum class LabelPolicy {
  training,    ///< labels must be in {0..C-1}
  evaluation,  ///< label C (unknown) is also allowed
};

/// CSV with header `f0,...,f{d-1},label`. When `num_known_classes` is absent,
/// C is inferred as max(label)+1 for training files and max(label) for evaluation files.
Dataset load_dataset(const std::filesystem::path& path, std::optional<int> num_known_classes = std::nullopt,
                     LabelPolicy policy = LabelPolicy::training);
Dataset parse_dataset(std::string_view text, std::optional<int> num_known_classes = std::nullopt,
                      LabelPolicy policy = LabelPolicy::training);
std::string format_dataset(const Dataset& dataset);
void save_dataset(const Dataset& dataset, const std::filesystem::path& path);

/// CSV with header `f0,...,f{d-1}`.
FeatureMatrix load_features(const std::filesystem::path& path);
FeatureMatrix parse_features(std::string_view text);
std::string format_features(const FeatureMatrix& features);
void save_features(const FeatureMatrix& features, const std::filesystem::path& path);

/// CSV with header `f0,...,f{d-1},weight`.
std::string format_weighted_features(const FeatureMatrix& features, const Eigen::VectorXd& weights);

}  // namespace aosr
