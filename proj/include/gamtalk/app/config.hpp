#pragma once

#include <cstddef>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "gamtalk/app/store.hpp"
#include "gamtalk/eval/benchmark.hpp"
#include "gamtalk/llm/gateway.hpp"

namespace gamtalk::app {

struct AppConfig {
  std::string endpoint_url = "https://api.openai.com/v1/chat/completions";
  std::string model_name = "gpt-4-0613";
  std::filesystem::path store_root = "gamtalk-store";
  int concurrency_limit = 4;
  // Largest graph text, in estimated tokens, placed into a conversation.
  // Unset sends every graph in full.
  std::optional<std::size_t> token_budget;
  double temperature = 0.0;
  int max_retries = 3;
  std::string api_key_env = llm::kApiKeyEnv;
  // Reuse replies to identical conversation requests from <store>/cache.
  // Benchmarks bypass it so recorded cassettes stay complete.
  bool response_cache = false;
  std::string host = "127.0.0.1";
  int port = 8080;

  void validate() const;
};

// Unknown keys are rejected so that typos surface.
AppConfig config_from_json(const nlohmann::json& j);
AppConfig load_config(const std::filesystem::path& path);
nlohmann::ordered_json config_to_json(const AppConfig& config);

llm::ChatParams chat_params(const AppConfig& config);

// Null unless config.response_cache is set.
std::shared_ptr<llm::ResponseCache> make_cache(const AppConfig& config, const StorePaths& paths);

enum class TransportKind { kLive, kReplay, kScripted };

TransportKind transport_kind_from_string(std::string_view text);

struct TransportOptions {
  TransportKind kind = TransportKind::kLive;
  // Replay source; with the live transport, also where exchanges are recorded.
  std::optional<std::string> cassette;
  // Records every exchange of any transport to this cassette.
  std::optional<std::string> record;
  // Scripted transport: "oracle", "adversarial", or a JSON file holding an
  // array of reply strings.
  std::optional<std::string> script;
};

// Transport for conversations. For the scripted "oracle" script, which
// only makes sense in benchmarks, every reply is "unknown".
std::shared_ptr<llm::Transport> make_transport(const AppConfig& config,
                                               const TransportOptions& options,
                                               const StorePaths& paths);

// Transport for a benchmark over `cases`; the scripted "oracle" script
// answers with each case's truth.
std::shared_ptr<llm::Transport> make_eval_transport(
    const AppConfig& config, const TransportOptions& options, const StorePaths& paths,
    const std::vector<eval::BenchmarkCase>& cases, const eval::GradeOptions& grade);

}  // namespace gamtalk::app
