#pragma once

#include <filesystem>
#include <string>

#include <json.hpp>

#include "gamtalk/gam/types.hpp"

namespace gamtalk::gam {

inline constexpr const char* kModelSchemaVersion = "gamtalk-model/1";

nlohmann::ordered_json term_to_json(const GraphTerm& term);
GraphTerm term_from_json(const nlohmann::json& j);

// Field-for-field mirror of GamModel plus a "version" field.
nlohmann::ordered_json model_to_json(const GamModel& model);
GamModel model_from_json(const nlohmann::json& j);

std::string serialize_model(const GamModel& model);
GamModel parse_model(const std::string& text);

void save_model(const GamModel& model, const std::filesystem::path& path);
GamModel load_model(const std::filesystem::path& path);

}  // namespace gamtalk::gam
