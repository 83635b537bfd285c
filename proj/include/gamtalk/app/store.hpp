#pragma once

#include <filesystem>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <json.hpp>

#include "gamtalk/gam/types.hpp"
#include "gamtalk/prompt/conversation.hpp"

namespace gamtalk::app {

// Layout of the on-disk state. Directories are created on first write.
struct StorePaths {
  std::filesystem::path root;

  std::filesystem::path models() const { return root / "models"; }
  std::filesystem::path sessions() const { return root / "sessions"; }
  std::filesystem::path cassettes() const { return root / "cassettes"; }
  std::filesystem::path reports() const { return root / "reports"; }
  std::filesystem::path cache() const { return root / "cache"; }

  std::filesystem::path model_file(std::string_view id) const;
  std::filesystem::path model_meta_file(std::string_view id) const;
  std::filesystem::path session_file(std::string_view id) const;
  std::filesystem::path transcript_file(std::string_view id) const;
  std::filesystem::path report_file(std::string_view id) const;
  // A bare name maps to cassettes/<name>.jsonl; anything with a directory
  // part or extension is used as given.
  std::filesystem::path cassette_file(std::string_view name) const;

  void ensure() const;
};

// Ids become file names: 1 to 64 characters from [A-Za-z0-9._-], not starting
// with '.'.
bool valid_id(std::string_view id);
void require_valid_id(std::string_view id);

struct ModelEntry {
  std::string id;
  // Dataset the model was trained on, or "upload".
  std::string source;
  prompt::DatasetContext context;
  gam::GamModel model;
};

// Models under models/<id>/ as model.json (the model file format) and
// meta.json (source and dataset context).
class ModelStore {
 public:
  explicit ModelStore(StorePaths paths) : paths_(std::move(paths)) {}

  // Throws Error(kConflict) when the id exists.
  void create(const ModelEntry& entry);
  // Replaces an existing model atomically.
  void replace(const ModelEntry& entry);
  // Throws Error(kNotFound).
  ModelEntry get(std::string_view id) const;
  bool exists(std::string_view id) const;
  std::vector<std::string> list() const;

 private:
  void write(const ModelEntry& entry);

  StorePaths paths_;
  mutable std::shared_mutex mu_;
};

struct Session {
  std::string id;
  std::string model_id;
  // Feature whose graph the conversation is about, if any.
  std::optional<std::string> feature;
  prompt::DatasetContext context;
  std::vector<prompt::Message> transcript;
  std::string created_at;
  std::string updated_at;
};

nlohmann::ordered_json session_to_json(const Session& session);

// Sessions as sessions/<id>.json (metadata) plus sessions/<id>.jsonl (one
// message per line). Both files are replaced atomically on every save.
class SessionStore {
 public:
  explicit SessionStore(StorePaths paths) : paths_(std::move(paths)) {}

  void save(const Session& session) const;
  // Throws Error(kNotFound); the transcript is validated on load.
  Session load(std::string_view id) const;
  bool exists(std::string_view id) const;
  std::string new_id() const;

  // Serializes writers of one session.
  std::mutex& lock_for(const std::string& id);

 private:
  StorePaths paths_;
  std::mutex locks_mu_;
  std::unordered_map<std::string, std::unique_ptr<std::mutex>> locks_;
};

std::string utc_now();

}  // namespace gamtalk::app
