#include "gamtalk/llm/gateway.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <thread>

#include <httplib.h>

#include "gamtalk/file_util.hpp"

namespace gamtalk::llm {
namespace {

std::string utc_timestamp() {
  const std::time_t now = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

nlohmann::ordered_json messages_json(const std::vector<Message>& messages) {
  auto arr = nlohmann::ordered_json::array();
  for (const auto& m : messages) {
    arr.push_back({{"role", std::string(prompt::to_string(m.role))},
                   {"content", m.content}});
  }
  return arr;
}

bool retryable_status(int status) {
  return status == 408 || status == 429 || status >= 500;
}

}  // namespace

void ChatParams::validate() const {
  if (model_name.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "model_name is empty");
  }
  if (!(temperature >= 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "temperature must be >= 0");
  }
  if (max_retries < 0) {
    throw Error(ErrorCode::kInvalidArgument, "max_retries must be >= 0");
  }
  if (max_output_tokens < 1) {
    throw Error(ErrorCode::kInvalidArgument, "max_output_tokens must be >= 1");
  }
}

std::string sha256_hex(std::string_view data) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(),
                 nullptr) != 1) {
    throw Error(ErrorCode::kIo, "SHA-256 computation failed");
  }
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  out.reserve(2 * len);
  for (unsigned int i = 0; i < len; ++i) {
    out.push_back(kHex[digest[i] >> 4]);
    out.push_back(kHex[digest[i] & 0xF]);
  }
  return out;
}

std::string canonical_request(const std::vector<Message>& messages,
                              const ChatParams& params) {
  nlohmann::ordered_json j;
  j["messages"] = messages_json(messages);
  j["model"] = params.model_name;
  j["temperature"] = params.temperature;
  return j.dump();
}

std::string request_digest(const std::vector<Message>& messages,
                           const ChatParams& params) {
  return sha256_hex(canonical_request(messages, params));
}

nlohmann::ordered_json chat_request_body(const std::vector<Message>& messages,
                                         const ChatParams& params) {
  nlohmann::ordered_json j;
  j["model"] = params.model_name;
  j["messages"] = messages_json(messages);
  j["temperature"] = params.temperature;
  j["max_tokens"] = params.max_output_tokens;
  return j;
}

std::string chat_response_content(const nlohmann::json& body) {
  try {
    const auto& content = body.at("choices").at(0).at("message").at("content");
    if (!content.is_string()) {
      throw Error(ErrorCode::kTransport, "response content is not a string");
    }
    return content.get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kTransport,
                std::string("malformed chat-completions response: ") + e.what());
  }
}

// ScriptedTransport

ScriptedTransport::ScriptedTransport(std::vector<std::string> replies)
    : queue_(replies.begin(), replies.end()) {}

ScriptedTransport::ScriptedTransport(Responder responder)
    : responder_(std::move(responder)) {}

void ScriptedTransport::push(std::string reply) {
  std::lock_guard lock(mu_);
  queue_.push_back(std::move(reply));
}

Message ScriptedTransport::send(const std::vector<Message>& messages,
                                const ChatParams&) {
  std::lock_guard lock(mu_);
  ++calls_;
  if (!queue_.empty()) {
    Message reply{prompt::Role::kAssistant, std::move(queue_.front())};
    queue_.pop_front();
    return reply;
  }
  if (responder_) return {prompt::Role::kAssistant, responder_(messages)};
  throw TransportError("scripted transport queue is empty", 1);
}

std::size_t ScriptedTransport::calls() const {
  std::lock_guard lock(mu_);
  return calls_;
}

std::size_t ScriptedTransport::remaining() const {
  std::lock_guard lock(mu_);
  return queue_.size();
}

// Cassette

Cassette::Cassette(std::filesystem::path path) : path_(std::move(path)) {
  for (const auto& record : read(path_)) digests_.insert(record.digest);
}

std::vector<CassetteRecord> Cassette::read(const std::filesystem::path& path) {
  std::vector<CassetteRecord> out;
  std::ifstream in(path);
  if (!in) return out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      out.push_back({j.at("digest").get<std::string>(), j.at("request"),
                     j.at("response"), j.value("timestamp", "")});
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::kParse, "cassette " + path.string() + " line " +
                                         std::to_string(line_no) + ": " +
                                         e.what());
    }
  }
  return out;
}

bool Cassette::append(const CassetteRecord& record) {
  std::lock_guard lock(mu_);
  if (digests_.count(record.digest) != 0) return false;
  if (path_.has_parent_path()) {
    std::filesystem::create_directories(path_.parent_path());
  }
  nlohmann::ordered_json j;
  j["digest"] = record.digest;
  j["request"] = record.request;
  j["response"] = record.response;
  j["timestamp"] = record.timestamp;
  std::ofstream out(path_, std::ios::app | std::ios::binary);
  if (!out) throw Error(ErrorCode::kIo, "cannot append to " + path_.string());
  out << j.dump() << '\n';
  out.flush();
  if (!out) throw Error(ErrorCode::kIo, "short write to " + path_.string());
  digests_.insert(record.digest);
  return true;
}

// ReplayTransport

ReplayTransport::ReplayTransport(const std::filesystem::path& cassette_path)
    : records_(Cassette::read(cassette_path)) {
  if (!std::filesystem::exists(cassette_path)) {
    throw Error(ErrorCode::kNotFound,
                "cassette " + cassette_path.string() + " does not exist");
  }
}

Message ReplayTransport::send(const std::vector<Message>& messages,
                              const ChatParams& params) {
  const std::string digest = request_digest(messages, params);
  std::size_t index = 0;
  if (next_ < records_.size() && records_[next_].digest == digest) {
    index = next_++;
    served_.emplace(digest, index);
  } else if (auto it = served_.find(digest); it != served_.end()) {
    index = it->second;
  } else if (next_ >= records_.size()) {
    throw TransportError("replay cassette exhausted", 1);
  } else {
    throw TransportError("replay digest mismatch: expected " +
                             records_[next_].digest + ", got " + digest,
                         1);
  }
  const auto& response = records_[index].response;
  return {prompt::Role::kAssistant, response.at("content").get<std::string>()};
}

// RecordingTransport

RecordingTransport::RecordingTransport(std::shared_ptr<Transport> inner,
                                       const std::filesystem::path& cassette_path)
    : inner_(std::move(inner)), cassette_(cassette_path) {}

Message RecordingTransport::send(const std::vector<Message>& messages,
                                 const ChatParams& params) {
  Message reply = inner_->send(messages, params);
  CassetteRecord record;
  record.digest = request_digest(messages, params);
  record.request = chat_request_body(messages, params);
  record.response = {{"role", "assistant"}, {"content", reply.content}};
  record.timestamp = utc_timestamp();
  cassette_.append(record);
  return reply;
}

// LiveTransport

LiveTransport::LiveTransport(std::string endpoint_url, std::string api_key_env)
    : api_key_env_(std::move(api_key_env)) {
  const auto scheme_end = endpoint_url.find("://");
  if (scheme_end == std::string::npos) {
    throw Error(ErrorCode::kInvalidArgument,
                "endpoint_url needs a scheme: " + endpoint_url);
  }
  const auto path_start = endpoint_url.find('/', scheme_end + 3);
  if (path_start == std::string::npos) {
    scheme_host_port_ = endpoint_url;
    path_ = "/";
  } else {
    scheme_host_port_ = endpoint_url.substr(0, path_start);
    path_ = endpoint_url.substr(path_start);
  }
}

Message LiveTransport::send(const std::vector<Message>& messages,
                            const ChatParams& params) {
  params.validate();
  const char* key = std::getenv(api_key_env_.c_str());
  if (key == nullptr || *key == '\0') {
    throw TransportError("credential missing: set " + api_key_env_, 0);
  }
  httplib::Client client(scheme_host_port_);
  const auto timeout = params.request_timeout;
  client.set_connection_timeout(timeout);
  client.set_read_timeout(timeout);
  client.set_write_timeout(timeout);
  const httplib::Headers headers{{"Authorization", std::string("Bearer ") + key}};
  const std::string body = chat_request_body(messages, params).dump();

  std::chrono::milliseconds slept{0};
  std::chrono::milliseconds backoff = params.initial_backoff;
  std::string last_error;
  int attempts = 0;
  for (int attempt = 0; attempt <= params.max_retries; ++attempt) {
    ++attempts;
    auto result = client.Post(path_, headers, body, "application/json");
    if (result && result->status == 200) {
      nlohmann::json parsed;
      try {
        parsed = nlohmann::json::parse(result->body);
      } catch (const nlohmann::json::parse_error& e) {
        throw TransportError(std::string("response is not JSON: ") + e.what(),
                             attempts);
      }
      return {prompt::Role::kAssistant, chat_response_content(parsed)};
    }
    if (result) {
      last_error = "HTTP " + std::to_string(result->status) + ": " +
                   result->body.substr(0, 200);
      if (!retryable_status(result->status)) {
        throw TransportError(last_error, attempts);
      }
    } else {
      last_error = httplib::to_string(result.error());
    }
    if (attempt == params.max_retries) break;
    const auto remaining = params.backoff_ceiling - slept;
    const auto pause = std::clamp(backoff, std::chrono::milliseconds{0}, remaining);
    if (pause.count() > 0) std::this_thread::sleep_for(pause);
    slept += pause;
    backoff *= 2;
  }
  throw TransportError("chat request failed after " + std::to_string(attempts) +
                           " attempts: " + last_error,
                       attempts);
}

// ResponseCache

ResponseCache::ResponseCache(std::filesystem::path dir) : dir_(std::move(dir)) {}

std::filesystem::path ResponseCache::entry_path(const std::string& digest) const {
  return dir_ / (digest + ".json");
}

std::optional<Message> ResponseCache::lookup(const std::vector<Message>& messages,
                                             const ChatParams& params) {
  const std::string digest = request_digest(messages, params);
  const auto path = entry_path(digest);
  std::lock_guard lock(mu_);
  if (!std::filesystem::exists(path)) return std::nullopt;
  try {
    const auto j = nlohmann::json::parse(read_file(path));
    if (j.at("digest").get<std::string>() != digest) {
      throw Error(ErrorCode::kParse, "digest mismatch");
    }
    return Message{prompt::Role::kAssistant, j.at("content").get<std::string>()};
  } catch (const std::exception&) {
    std::error_code ec;
    std::filesystem::remove(path, ec);
    return std::nullopt;
  }
}

void ResponseCache::store(const std::vector<Message>& messages,
                          const ChatParams& params, const Message& reply) {
  const std::string digest = request_digest(messages, params);
  nlohmann::ordered_json j;
  j["digest"] = digest;
  j["content"] = reply.content;
  std::lock_guard lock(mu_);
  write_file_atomic(entry_path(digest), j.dump());
}

// ChatClient

ChatClient::ChatClient(std::shared_ptr<Transport> transport, ChatParams params,
                       std::shared_ptr<ResponseCache> cache)
    : transport_(std::move(transport)),
      params_(std::move(params)),
      cache_(std::move(cache)) {
  params_.validate();
}

Message ChatClient::complete(const std::vector<Message>& messages) {
  prompt::validate_conversation(messages);
  if (cache_) {
    if (auto hit = cache_->lookup(messages, params_)) return *hit;
  }
  {
    std::lock_guard lock(mu_);
    ++transport_calls_;
  }
  Message reply = transport_->send(messages, params_);
  if (cache_) cache_->store(messages, params_, reply);
  return reply;
}

std::size_t ChatClient::transport_calls() const {
  std::lock_guard lock(mu_);
  return transport_calls_;
}

Message complete_chat(const std::vector<Message>& messages,
                      const ChatParams& params, Transport& transport) {
  params.validate();
  prompt::validate_conversation(messages);
  return transport.send(messages, params);
}

}  // namespace gamtalk::llm
