#include "gamtalk/app/store.hpp"

#include <ctime>
#include <random>
#include <sstream>

#include "gamtalk/error.hpp"
#include "gamtalk/file_util.hpp"
#include "gamtalk/gam/model_io.hpp"

namespace gamtalk::app {
namespace fs = std::filesystem;

namespace {

nlohmann::ordered_json context_to_json(const prompt::DatasetContext& ctx) {
  return {{"description", ctx.description}, {"target_semantics", ctx.target_semantics}};
}

prompt::DatasetContext context_from_json(const nlohmann::json& j) {
  return {j.at("description").get<std::string>(),
          j.at("target_semantics").get<std::string>()};
}

nlohmann::json parse_json_file(const fs::path& path) {
  try {
    return nlohmann::json::parse(read_file(path));
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kParse, path.string() + ": " + e.what());
  }
}

}  // namespace

fs::path StorePaths::model_file(std::string_view id) const {
  return models() / std::string(id) / "model.json";
}

fs::path StorePaths::model_meta_file(std::string_view id) const {
  return models() / std::string(id) / "meta.json";
}

fs::path StorePaths::session_file(std::string_view id) const {
  return sessions() / (std::string(id) + ".json");
}

fs::path StorePaths::transcript_file(std::string_view id) const {
  return sessions() / (std::string(id) + ".jsonl");
}

fs::path StorePaths::report_file(std::string_view id) const {
  return reports() / (std::string(id) + ".json");
}

fs::path StorePaths::cassette_file(std::string_view name) const {
  const fs::path p(name);
  if (p.has_parent_path() || p.has_extension()) return p;
  return cassettes() / (std::string(name) + ".jsonl");
}

void StorePaths::ensure() const {
  for (const auto& dir : {models(), sessions(), cassettes(), reports()}) {
    fs::create_directories(dir);
  }
}

bool valid_id(std::string_view id) {
  if (id.empty() || id.size() > 64 || id.front() == '.') return false;
  for (char c : id) {
    const bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') ||
                    (c >= '0' && c <= '9') || c == '.' || c == '_' || c == '-';
    if (!ok) return false;
  }
  return true;
}

void require_valid_id(std::string_view id) {
  if (!valid_id(id)) {
    throw Error(ErrorCode::kInvalidArgument,
                "invalid id '" + std::string(id) +
                    "' (1-64 characters from A-Z a-z 0-9 . _ -)");
  }
}

void ModelStore::write(const ModelEntry& entry) {
  entry.model.validate();
  entry.context.validate();
  nlohmann::ordered_json meta;
  meta["id"] = entry.id;
  meta["source"] = entry.source;
  meta["context"] = context_to_json(entry.context);
  write_file_atomic(paths_.model_meta_file(entry.id), meta.dump(2) + "\n");
  gam::save_model(entry.model, paths_.model_file(entry.id));
}

void ModelStore::create(const ModelEntry& entry) {
  require_valid_id(entry.id);
  std::unique_lock lock(mu_);
  if (fs::exists(paths_.model_file(entry.id))) {
    throw Error(ErrorCode::kConflict, "model '" + entry.id + "' already exists");
  }
  write(entry);
}

void ModelStore::replace(const ModelEntry& entry) {
  require_valid_id(entry.id);
  std::unique_lock lock(mu_);
  if (!fs::exists(paths_.model_file(entry.id))) {
    throw Error(ErrorCode::kNotFound, "no model '" + entry.id + "'");
  }
  write(entry);
}

ModelEntry ModelStore::get(std::string_view id) const {
  if (!valid_id(id)) throw Error(ErrorCode::kNotFound, "no model '" + std::string(id) + "'");
  std::shared_lock lock(mu_);
  if (!fs::exists(paths_.model_file(id))) {
    throw Error(ErrorCode::kNotFound, "no model '" + std::string(id) + "'");
  }
  ModelEntry entry;
  entry.id = std::string(id);
  entry.model = gam::load_model(paths_.model_file(id));
  const auto meta = parse_json_file(paths_.model_meta_file(id));
  try {
    entry.source = meta.at("source").get<std::string>();
    entry.context = context_from_json(meta.at("context"));
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kParse, "model '" + entry.id + "' metadata: " + e.what());
  }
  return entry;
}

bool ModelStore::exists(std::string_view id) const {
  std::shared_lock lock(mu_);
  return valid_id(id) && fs::exists(paths_.model_file(id));
}

std::vector<std::string> ModelStore::list() const {
  std::shared_lock lock(mu_);
  std::vector<std::string> out;
  if (!fs::is_directory(paths_.models())) return out;
  for (const auto& dir : fs::directory_iterator(paths_.models())) {
    const auto id = dir.path().filename().string();
    if (valid_id(id) && fs::exists(paths_.model_file(id))) out.push_back(id);
  }
  std::sort(out.begin(), out.end());
  return out;
}

nlohmann::ordered_json session_to_json(const Session& session) {
  nlohmann::ordered_json j;
  j["id"] = session.id;
  j["model_id"] = session.model_id;
  j["feature"] = session.feature ? nlohmann::ordered_json(*session.feature)
                                 : nlohmann::ordered_json(nullptr);
  j["context"] = context_to_json(session.context);
  j["created_at"] = session.created_at;
  j["updated_at"] = session.updated_at;
  auto transcript = nlohmann::ordered_json::array();
  for (const auto& m : session.transcript) {
    transcript.push_back(
        {{"role", std::string(prompt::to_string(m.role))}, {"content", m.content}});
  }
  j["transcript"] = std::move(transcript);
  return j;
}

void SessionStore::save(const Session& session) const {
  require_valid_id(session.id);
  prompt::validate_conversation(session.transcript);
  std::string lines;
  for (const auto& m : session.transcript) {
    nlohmann::ordered_json line{{"role", std::string(prompt::to_string(m.role))},
                                {"content", m.content}};
    lines += line.dump() + "\n";
  }
  auto meta = session_to_json(session);
  meta.erase("transcript");
  meta["message_count"] = session.transcript.size();
  write_file_atomic(paths_.transcript_file(session.id), lines);
  write_file_atomic(paths_.session_file(session.id), meta.dump(2) + "\n");
}

Session SessionStore::load(std::string_view id) const {
  if (!valid_id(id) || !fs::exists(paths_.session_file(id))) {
    throw Error(ErrorCode::kNotFound, "no session '" + std::string(id) + "'");
  }
  const auto meta = parse_json_file(paths_.session_file(id));
  Session s;
  try {
    s.id = meta.at("id").get<std::string>();
    s.model_id = meta.at("model_id").get<std::string>();
    if (!meta.at("feature").is_null()) s.feature = meta.at("feature").get<std::string>();
    s.context = context_from_json(meta.at("context"));
    s.created_at = meta.at("created_at").get<std::string>();
    s.updated_at = meta.at("updated_at").get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kParse, "session '" + std::string(id) + "': " + e.what());
  }
  std::istringstream in(read_file(paths_.transcript_file(id)));
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      s.transcript.push_back({prompt::role_from_string(j.at("role").get<std::string>()),
                              j.at("content").get<std::string>()});
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::kParse, "session '" + s.id + "' transcript: " + e.what());
    }
  }
  prompt::validate_conversation(s.transcript);
  return s;
}

bool SessionStore::exists(std::string_view id) const {
  return valid_id(id) && fs::exists(paths_.session_file(id));
}

std::string SessionStore::new_id() const {
  static thread_local std::mt19937_64 gen{std::random_device{}()};
  static constexpr char kHex[] = "0123456789abcdef";
  for (;;) {
    std::string id = "s-";
    for (int i = 0; i < 12; ++i) id.push_back(kHex[gen() % 16]);
    if (!exists(id)) return id;
  }
}

std::mutex& SessionStore::lock_for(const std::string& id) {
  std::lock_guard guard(locks_mu_);
  auto& slot = locks_[id];
  if (!slot) slot = std::make_unique<std::mutex>();
  return *slot;
}

std::string utc_now() {
  const std::time_t now = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace gamtalk::app
