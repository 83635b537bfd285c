#pragma once

#include <chrono>
#include <cstddef>
#include <deque>
#include <filesystem>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include <json.hpp>

#include "gamtalk/error.hpp"
#include "gamtalk/prompt/conversation.hpp"

namespace gamtalk::llm {

using prompt::Message;

inline constexpr const char* kApiKeyEnv = "GAMTALK_API_KEY";

// Transport failure carrying how many attempts were made.
class TransportError : public Error {
 public:
  TransportError(const std::string& message, int attempts)
      : Error(ErrorCode::kTransport, message), attempts_(attempts) {}
  int attempts() const noexcept { return attempts_; }

 private:
  int attempts_;
};

struct ChatParams {
  std::string model_name = "gpt-4-0613";
  double temperature = 0.0;
  int max_output_tokens = 1024;
  std::chrono::milliseconds request_timeout{60000};
  int max_retries = 3;
  std::chrono::milliseconds initial_backoff{500};
  // Upper bound on the summed sleep time across all retries of one request.
  std::chrono::milliseconds backoff_ceiling{30000};

  void validate() const;
};

// Canonical JSON of the fields that identify a request (messages, model name,
// temperature) and its SHA-256 hex digest.
std::string canonical_request(const std::vector<Message>& messages,
                              const ChatParams& params);
std::string request_digest(const std::vector<Message>& messages,
                           const ChatParams& params);
std::string sha256_hex(std::string_view data);

// Chat-completions request body ({"model", "messages", "temperature",
// "max_tokens"}).
nlohmann::ordered_json chat_request_body(const std::vector<Message>& messages,
                                         const ChatParams& params);
// choices[0].message.content of a chat-completions response body.
std::string chat_response_content(const nlohmann::json& body);

class Transport {
 public:
  virtual ~Transport() = default;
  // Returns the assistant reply; throws Error(kTransport) on failure.
  virtual Message send(const std::vector<Message>& messages,
                       const ChatParams& params) = 0;
  virtual std::string name() const = 0;
  // True when send() may be called from several threads at once.
  virtual bool concurrent() const { return false; }
};

// Pops queued replies in order; a responder, when set, answers once the queue
// is empty.
class ScriptedTransport : public Transport {
 public:
  using Responder = std::function<std::string(const std::vector<Message>&)>;

  explicit ScriptedTransport(std::vector<std::string> replies = {});
  explicit ScriptedTransport(Responder responder);

  void push(std::string reply);
  Message send(const std::vector<Message>& messages,
               const ChatParams& params) override;
  std::string name() const override { return "scripted"; }

  std::size_t calls() const;
  std::size_t remaining() const;

 private:
  mutable std::mutex mu_;
  std::deque<std::string> queue_;
  Responder responder_;
  std::size_t calls_ = 0;
};

struct CassetteRecord {
  std::string digest;
  nlohmann::json request;
  nlohmann::json response;
  std::string timestamp;
};

// Append-only line-delimited file of request/response records.
class Cassette {
 public:
  explicit Cassette(std::filesystem::path path);

  // Missing file loads as empty; malformed lines throw Error(kParse).
  static std::vector<CassetteRecord> read(const std::filesystem::path& path);

  // Appends unless a record with the same digest exists. Returns whether a
  // line was written.
  bool append(const CassetteRecord& record);

  const std::filesystem::path& path() const { return path_; }

 private:
  std::mutex mu_;
  std::filesystem::path path_;
  std::unordered_set<std::string> digests_;
};

// Serves recorded responses strictly in cassette order. A request repeating
// an already served digest gets that record's response again.
class ReplayTransport : public Transport {
 public:
  explicit ReplayTransport(const std::filesystem::path& cassette_path);

  Message send(const std::vector<Message>& messages,
               const ChatParams& params) override;
  std::string name() const override { return "replay"; }

  std::size_t remaining() const { return records_.size() - next_; }

 private:
  std::vector<CassetteRecord> records_;
  std::size_t next_ = 0;
  std::unordered_map<std::string, std::size_t> served_;
};

// Forwards to an inner transport and appends every exchange to a cassette.
class RecordingTransport : public Transport {
 public:
  RecordingTransport(std::shared_ptr<Transport> inner,
                     const std::filesystem::path& cassette_path);

  Message send(const std::vector<Message>& messages,
               const ChatParams& params) override;
  std::string name() const override { return inner_->name(); }

 private:
  std::shared_ptr<Transport> inner_;
  Cassette cassette_;
};

// Chat-completions over HTTP(S) with bounded exponential backoff. Connection
// failures, 408, 429 and 5xx responses are retried; other statuses fail
// immediately.
class LiveTransport : public Transport {
 public:
  // `endpoint_url` is the full completions URL, e.g.
  // https://api.openai.com/v1/chat/completions. The credential is read from
  // the environment variable `api_key_env` on each request.
  explicit LiveTransport(std::string endpoint_url,
                         std::string api_key_env = kApiKeyEnv);

  Message send(const std::vector<Message>& messages,
               const ChatParams& params) override;
  std::string name() const override { return "live"; }
  bool concurrent() const override { return true; }

 private:
  std::string scheme_host_port_;
  std::string path_;
  std::string api_key_env_;
};

// One JSON file per request digest under `dir`. Unreadable entries are
// deleted and reported as misses.
class ResponseCache {
 public:
  explicit ResponseCache(std::filesystem::path dir);

  std::optional<Message> lookup(const std::vector<Message>& messages,
                                const ChatParams& params);
  void store(const std::vector<Message>& messages, const ChatParams& params,
             const Message& reply);

 private:
  std::filesystem::path entry_path(const std::string& digest) const;

  std::mutex mu_;
  std::filesystem::path dir_;
};

// Cache-then-transport front door used by the rest of the toolkit.
class ChatClient {
 public:
  ChatClient(std::shared_ptr<Transport> transport, ChatParams params,
             std::shared_ptr<ResponseCache> cache = nullptr);

  // Validates the conversation, consults the cache, then the transport.
  Message complete(const std::vector<Message>& messages);

  const ChatParams& params() const { return params_; }
  Transport& transport() { return *transport_; }
  std::size_t transport_calls() const;

 private:
  std::shared_ptr<Transport> transport_;
  ChatParams params_;
  std::shared_ptr<ResponseCache> cache_;
  mutable std::mutex mu_;
  std::size_t transport_calls_ = 0;
};

Message complete_chat(const std::vector<Message>& messages,
                      const ChatParams& params, Transport& transport);

}  // namespace gamtalk::llm
