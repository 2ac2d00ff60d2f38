#pragma once

#include <filesystem>

#include "iotids/model.hpp"

namespace iotids {

inline constexpr int kModelSchemaVersion = 1;

/// Nested node record: leaves carry class weights, sample count and value;
/// internal nodes add feature, threshold, left and right.
Json tree_to_json(const DecisionTreeModel& tree);
DecisionTreeModel tree_from_json(const Json& node, const TreeConfig& config, std::size_t n_features);

Json model_to_json(const TrainedModel& model);
/// Throws ConfigError on an unknown schema version or malformed document.
TrainedModel model_from_json(const Json& doc);

void save_model(const TrainedModel& model, const std::filesystem::path& path);
TrainedModel load_model(const std::filesystem::path& path);

}  // namespace iotids
