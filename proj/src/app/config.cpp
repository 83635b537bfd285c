#include "gamtalk/app/config.hpp"

#include <set>

#include "gamtalk/error.hpp"
#include "gamtalk/file_util.hpp"

namespace gamtalk::app {
namespace {

std::vector<std::string> read_script(const std::filesystem::path& path) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(read_file(path));
    return j.get<std::vector<std::string>>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kParse,
                path.string() + ": script must be a JSON array of strings (" + e.what() +
                    ")");
  }
}

std::shared_ptr<llm::Transport> base_transport(const AppConfig& config,
                                               const TransportOptions& options,
                                               const StorePaths& paths,
                                               llm::ScriptedTransport::Responder oracle) {
  switch (options.kind) {
    case TransportKind::kLive: {
      std::shared_ptr<llm::Transport> live =
          std::make_shared<llm::LiveTransport>(config.endpoint_url, config.api_key_env);
      if (options.cassette) {
        live = std::make_shared<llm::RecordingTransport>(
            live, paths.cassette_file(*options.cassette));
      }
      return live;
    }
    case TransportKind::kReplay:
      if (!options.cassette) {
        throw Error(ErrorCode::kInvalidArgument, "the replay transport needs --cassette");
      }
      return std::make_shared<llm::ReplayTransport>(paths.cassette_file(*options.cassette));
    case TransportKind::kScripted:
      if (!options.script) {
        throw Error(ErrorCode::kInvalidArgument, "the scripted transport needs --script");
      }
      if (*options.script == "oracle") {
        return std::make_shared<llm::ScriptedTransport>(
            oracle ? std::move(oracle)
                   : [](const std::vector<llm::Message>&) { return std::string("unknown"); });
      }
      if (*options.script == "adversarial") {
        return std::make_shared<llm::ScriptedTransport>(eval::adversarial_responder());
      }
      return std::make_shared<llm::ScriptedTransport>(read_script(*options.script));
  }
  throw Error(ErrorCode::kInvalidArgument, "unknown transport");
}

std::shared_ptr<llm::Transport> with_recording(std::shared_ptr<llm::Transport> t,
                                               const TransportOptions& options,
                                               const StorePaths& paths) {
  if (!options.record) return t;
  return std::make_shared<llm::RecordingTransport>(std::move(t),
                                                   paths.cassette_file(*options.record));
}

}  // namespace

void AppConfig::validate() const {
  auto invalid = [](const std::string& m) { throw Error(ErrorCode::kInvalidArgument, m); };
  if (endpoint_url.empty()) invalid("endpoint_url is empty");
  if (model_name.empty()) invalid("model_name is empty");
  if (store_root.empty()) invalid("store_root is empty");
  if (concurrency_limit < 1) invalid("concurrency_limit must be >= 1");
  if (token_budget && *token_budget < 1) invalid("token_budget must be >= 1");
  if (!(temperature >= 0.0)) invalid("temperature must be >= 0");
  if (max_retries < 0) invalid("max_retries must be >= 0");
  if (port < 0 || port > 65535) invalid("port must be in [0, 65535]");
}

AppConfig config_from_json(const nlohmann::json& j) {
  static const std::set<std::string> kKeys{
      "endpoint_url", "model_name", "store_root", "concurrency_limit", "token_budget",
      "temperature",  "max_retries", "api_key_env", "host", "port",
      "response_cache"};
  if (!j.is_object()) throw Error(ErrorCode::kParse, "config must be a JSON object");
  for (const auto& [key, value] : j.items()) {
    if (kKeys.count(key) == 0) {
      throw Error(ErrorCode::kParse, "unknown config key '" + key + "'");
    }
  }
  AppConfig c;
  try {
    c.endpoint_url = j.value("endpoint_url", c.endpoint_url);
    c.model_name = j.value("model_name", c.model_name);
    c.store_root = j.value("store_root", c.store_root.string());
    c.concurrency_limit = j.value("concurrency_limit", c.concurrency_limit);
    if (j.contains("token_budget") && !j.at("token_budget").is_null()) {
      c.token_budget = j.at("token_budget").get<std::size_t>();
    }
    c.temperature = j.value("temperature", c.temperature);
    c.max_retries = j.value("max_retries", c.max_retries);
    c.api_key_env = j.value("api_key_env", c.api_key_env);
    c.response_cache = j.value("response_cache", c.response_cache);
    c.host = j.value("host", c.host);
    c.port = j.value("port", c.port);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kParse, std::string("bad config value: ") + e.what());
  }
  c.validate();
  return c;
}

AppConfig load_config(const std::filesystem::path& path) {
  try {
    return config_from_json(nlohmann::json::parse(read_file(path)));
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorCode::kParse, path.string() + ": " + e.what());
  }
}

nlohmann::ordered_json config_to_json(const AppConfig& c) {
  nlohmann::ordered_json budget = nullptr;
  if (c.token_budget) budget = *c.token_budget;
  return {{"endpoint_url", c.endpoint_url},
          {"model_name", c.model_name},
          {"store_root", c.store_root.string()},
          {"concurrency_limit", c.concurrency_limit},
          {"token_budget", budget},
          {"temperature", c.temperature},
          {"max_retries", c.max_retries},
          {"api_key_env", c.api_key_env},
          {"response_cache", c.response_cache},
          {"host", c.host},
          {"port", c.port}};
}

llm::ChatParams chat_params(const AppConfig& config) {
  llm::ChatParams p;
  p.model_name = config.model_name;
  p.temperature = config.temperature;
  p.max_retries = config.max_retries;
  return p;
}

std::shared_ptr<llm::ResponseCache> make_cache(const AppConfig& config, const StorePaths& paths) {
  if (!config.response_cache) return nullptr;
  return std::make_shared<llm::ResponseCache>(paths.cache());
}

TransportKind transport_kind_from_string(std::string_view text) {
  if (text == "live") return TransportKind::kLive;
  if (text == "replay") return TransportKind::kReplay;
  if (text == "scripted") return TransportKind::kScripted;
  throw Error(ErrorCode::kInvalidArgument,
              "unknown transport '" + std::string(text) + "' (live, replay, scripted)");
}

std::shared_ptr<llm::Transport> make_transport(const AppConfig& config,
                                               const TransportOptions& options,
                                               const StorePaths& paths) {
  return with_recording(base_transport(config, options, paths, nullptr), options, paths);
}

std::shared_ptr<llm::Transport> make_eval_transport(
    const AppConfig& config, const TransportOptions& options, const StorePaths& paths,
    const std::vector<eval::BenchmarkCase>& cases, const eval::GradeOptions& grade) {
  return with_recording(
      base_transport(config, options, paths, eval::oracle_echo_responder(cases, grade)),
      options, paths);
}

}  // namespace gamtalk::app
