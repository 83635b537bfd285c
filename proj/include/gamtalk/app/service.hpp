#pragma once

#include <map>
#include <memory>
#include <string>

#include <json.hpp>

#include "gamtalk/app/config.hpp"
#include "gamtalk/app/store.hpp"
#include "gamtalk/llm/gateway.hpp"
#include "gamtalk/prompt/conversation.hpp"

namespace httplib {
class Server;
}

namespace gamtalk::app {

struct ApiRequest {
  std::string method;
  // Percent-decoded path, e.g. "/models/m-1/graphs/Age/text".
  std::string path;
  std::map<std::string, std::string> query;
  std::string body;
};

struct ApiResponse {
  int status = 200;
  nlohmann::ordered_json body;
};

// JSON-over-HTTP front end for models, graph text, perturbations, chat
// sessions and benchmark runs. All state lives under the configured store.
class Service {
 public:
  // Conversations use a transport built from `transport`; every benchmark run
  // builds its own so replays start at the beginning of the cassette.
  Service(AppConfig config, TransportOptions transport);
  // Uses `transport` for conversations and benchmark runs alike.
  Service(AppConfig config, std::shared_ptr<llm::Transport> transport);
  ~Service();

  Service(const Service&) = delete;
  Service& operator=(const Service&) = delete;

  // Routing and handling without a socket; errors map to 400, 404, 409, 502.
  ApiResponse handle(const ApiRequest& request);

  // Binds to config.host:config.port (port 0 picks a free one) and returns
  // the bound port; run() then serves until stop().
  int bind();
  void run();
  void stop();

  const StorePaths& paths() const { return paths_; }

 private:
  ApiResponse route(const ApiRequest& request);
  ApiResponse create_model(const nlohmann::json& body);
  ApiResponse list_models();
  ApiResponse get_model(const std::string& id);
  ApiResponse list_graphs(const std::string& id);
  ApiResponse graph_text(const std::string& id, const std::string& feature,
                         const std::map<std::string, std::string>& query);
  ApiResponse perturb(const std::string& id, const nlohmann::json& body);
  ApiResponse create_session(const nlohmann::json& body);
  ApiResponse get_session(const std::string& id);
  ApiResponse post_session_message(const std::string& id, const nlohmann::json& body);
  ApiResponse run_eval(const nlohmann::json& body);
  ApiResponse list_reports();
  ApiResponse get_report(const std::string& id);

  AppConfig config_;
  StorePaths paths_;
  std::optional<TransportOptions> transport_options_;
  std::shared_ptr<llm::Transport> transport_;
  std::unique_ptr<llm::ChatClient> client_;
  prompt::PromptEngine engine_;
  ModelStore models_;
  SessionStore sessions_;
  std::unique_ptr<httplib::Server> server_;
};

}  // namespace gamtalk::app
