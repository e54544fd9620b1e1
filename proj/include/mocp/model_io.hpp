#pragma once

#include "mocp/predictor.hpp"

#include <json.hpp>

#include <string>

namespace mocp {

inline constexpr int kModelSchemaVersion = 1;

//! JSON document for conditional_gaussian, knn_kde and oracle models.
//! Matrices are stored row-major as nested arrays.
nlohmann::json model_to_json(const BasePredictor& model);
ModelPtr model_from_json(const nlohmann::json& doc);

void save_model(const BasePredictor& model, const std::string& path);
ModelPtr load_model(const std::string& path);

} // namespace mocp
