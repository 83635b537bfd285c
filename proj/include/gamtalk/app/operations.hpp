#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "gamtalk/app/datasets.hpp"
#include "gamtalk/app/store.hpp"
#include "gamtalk/eval/benchmark.hpp"
#include "gamtalk/gam/types.hpp"
#include "gamtalk/llm/gateway.hpp"
#include "gamtalk/prompt/conversation.hpp"
#include "gamtalk/text/graph_text.hpp"
#include "gamtalk/text/tokens.hpp"

// Capabilities shared by the command line and the service, so both give the
// same results for the same inputs.
namespace gamtalk::app {

// "m-" followed by the first 12 hex digits of the model file's SHA-256.
std::string content_model_id(const gam::GamModel& model);

// Fit settings from a JSON object with any of the FitConfig field names plus
// "link" ("identity" or "logit"); unknown keys are rejected.
gam::FitConfig fit_config_from_json(const nlohmann::json& j, gam::FitConfig base = {});

ModelEntry train_dataset_model(std::string_view dataset, const DatasetOptions& data,
                               const gam::FitConfig& fit,
                               std::optional<std::string> id = std::nullopt);

struct ServedGraph {
  std::string feature;
  text::GraphText text;
  std::size_t tokens = 0;
  bool simplified = false;
  std::size_t merges = 0;
  double max_merge_gap = 0.0;
};

// Canonical text of a term, simplified when it exceeds `budget` tokens.
ServedGraph serve_graph(const gam::GraphTerm& term, std::optional<std::size_t> budget,
                        const text::RenderOptions& opts = {},
                        const text::TokenEstimator& estimator = {});

struct Perturbation {
  // Target term. Unset inverts every term; swaps require it.
  std::optional<std::string> feature;
  bool invert_y = false;
  std::optional<std::pair<std::string, std::string>> swap;
};

gam::GamModel apply_perturbation(const gam::GamModel& model, const Perturbation& p);

Session start_session(const ModelEntry& entry, std::optional<std::string> feature,
                      const prompt::PromptEngine& engine);

// Appends a user turn and the assistant's reply. With `feature`, the user turn
// is the graph message embedding that feature's graph and `content` becomes
// the question. The session is unchanged when the transport fails.
prompt::Message post_message(Session& session, const ModelEntry& entry,
                             const std::string& content,
                             const std::optional<std::string>& feature,
                             llm::ChatClient& client, const prompt::PromptEngine& engine,
                             std::optional<std::size_t> token_budget);

struct Description {
  std::string feature;
  std::vector<prompt::Message> transcript;
  // Replies to the describe, surprises and summary turns.
  std::vector<std::string> responses;
};

// Three-turn description of one graph.
Description describe_graph(const ModelEntry& entry, const std::string& feature,
                           llm::ChatClient& client, const prompt::PromptEngine& engine,
                           std::optional<std::size_t> token_budget);

struct ModelSummary {
  std::vector<Description> descriptions;
  prompt::ModelSummaryPrompt prompt;
  std::string summary;
};

// Describes every graph, then asks for a summary of the whole model from the
// per-graph summaries and the importance table.
ModelSummary summarize_model(const ModelEntry& entry, llm::ChatClient& client,
                             const prompt::PromptEngine& engine,
                             std::optional<std::size_t> token_budget);

// The 31-graph benchmark suite: models fitted on iris, diabetes and
// synthetic_additive (2000 rows) with `seed`.
std::vector<eval::BenchmarkGraph> bundled_suite(std::uint64_t seed,
                                                const DatasetOptions& data = {});

// "r-" followed by the first 12 hex digits of the serialized report's SHA-256.
std::string content_report_id(const eval::BenchmarkReport& report);

}  // namespace gamtalk::app
