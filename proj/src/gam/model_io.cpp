#include "gamtalk/gam/model_io.hpp"

#include "gamtalk/error.hpp"
#include "gamtalk/file_util.hpp"

namespace gamtalk::gam {
namespace {

template <typename T>
T required(const nlohmann::json& j, const char* key) {
  if (!j.is_object() || !j.contains(key)) {
    throw Error(ErrorCode::kParse, std::string("missing field '") + key + "'");
  }
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kParse,
                std::string("bad field '") + key + "': " + e.what());
  }
}

}  // namespace

nlohmann::ordered_json term_to_json(const GraphTerm& term) {
  nlohmann::ordered_json j;
  j["feature_name"] = term.feature_name;
  j["kind"] = std::string(to_string(term.kind));
  if (term.is_continuous()) {
    j["edges"] = term.edges;
  } else {
    j["labels"] = term.labels;
  }
  j["means"] = term.means;
  j["lower_ci"] = term.lower_ci;
  j["upper_ci"] = term.upper_ci;
  j["weights"] = term.weights;
  return j;
}

GraphTerm term_from_json(const nlohmann::json& j) {
  GraphTerm term;
  term.feature_name = required<std::string>(j, "feature_name");
  term.kind = feature_kind_from_string(required<std::string>(j, "kind"));
  if (term.is_continuous()) {
    term.edges = required<std::vector<double>>(j, "edges");
  } else {
    term.labels = required<std::vector<std::string>>(j, "labels");
  }
  term.means = required<std::vector<double>>(j, "means");
  term.lower_ci = required<std::vector<double>>(j, "lower_ci");
  term.upper_ci = required<std::vector<double>>(j, "upper_ci");
  term.weights = required<std::vector<double>>(j, "weights");
  term.validate();
  return term;
}

nlohmann::ordered_json model_to_json(const GamModel& model) {
  nlohmann::ordered_json j;
  j["version"] = kModelSchemaVersion;
  j["intercept"] = model.intercept;
  j["link"] = std::string(to_string(model.link));
  j["target_description"] = model.target_description;
  j["importances"] = model.importances;
  j["terms"] = nlohmann::ordered_json::array();
  for (const auto& term : model.terms) j["terms"].push_back(term_to_json(term));
  return j;
}

GamModel model_from_json(const nlohmann::json& j) {
  const auto version = required<std::string>(j, "version");
  if (version != kModelSchemaVersion) {
    throw Error(ErrorCode::kParse, "unsupported model version '" + version + "'");
  }
  GamModel model;
  model.intercept = required<double>(j, "intercept");
  model.link = link_from_string(required<std::string>(j, "link"));
  model.target_description = required<std::string>(j, "target_description");
  model.importances = required<std::vector<double>>(j, "importances");
  const auto& terms = j.at("terms");
  if (!terms.is_array()) throw Error(ErrorCode::kParse, "'terms' must be an array");
  for (const auto& t : terms) model.terms.push_back(term_from_json(t));
  model.validate();
  return model;
}

std::string serialize_model(const GamModel& model) {
  return model_to_json(model).dump(2) + "\n";
}

GamModel parse_model(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorCode::kParse, std::string("model is not JSON: ") + e.what());
  }
  return model_from_json(j);
}

void save_model(const GamModel& model, const std::filesystem::path& path) {
  write_file_atomic(path, serialize_model(model));
}

GamModel load_model(const std::filesystem::path& path) {
  return parse_model(read_file(path));
}

}  // namespace gamtalk::gam
