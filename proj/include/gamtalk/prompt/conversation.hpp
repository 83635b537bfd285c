#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "gamtalk/gam/types.hpp"
#include "gamtalk/prompt/templates.hpp"
#include "gamtalk/text/graph_text.hpp"
#include "gamtalk/text/tokens.hpp"

namespace gamtalk::prompt {

enum class Role { kSystem, kUser, kAssistant };

std::string_view to_string(Role role);
Role role_from_string(std::string_view text);

struct Message {
  Role role = Role::kUser;
  std::string content;

  bool operator==(const Message&) const = default;
};

enum class TaskType {
  kDescribe,
  kReadValue,
  kMonotonicity,
  kLargestJump,
  kAnomaly,
  kSummarizeGraph,
  kSummarizeModel,
};

std::string_view to_string(TaskType type);
TaskType task_type_from_string(std::string_view text);

struct TaskKind {
  TaskType type = TaskType::kDescribe;
  // Query point of a read_value task.
  std::optional<gam::FeatureValue> point;

  static TaskKind describe() { return {TaskType::kDescribe, std::nullopt}; }
  static TaskKind read_value(gam::FeatureValue x) {
    return {TaskType::kReadValue, std::move(x)};
  }
  static TaskKind monotonicity() { return {TaskType::kMonotonicity, std::nullopt}; }
  static TaskKind largest_jump() { return {TaskType::kLargestJump, std::nullopt}; }
  static TaskKind anomaly() { return {TaskType::kAnomaly, std::nullopt}; }
  static TaskKind summarize_graph() {
    return {TaskType::kSummarizeGraph, std::nullopt};
  }

  bool operator==(const TaskKind&) const = default;
};

struct DatasetContext {
  std::string description;
  // What the y-axis contributes to, e.g. "the logprobs to the probability
  // that the passenger survived".
  std::string target_semantics;

  void validate() const;
  bool operator==(const DatasetContext&) const = default;
};

struct Conversation {
  std::vector<Message> messages;
  TaskKind task;
  std::string feature_name;
};

struct ModelSummaryPrompt {
  std::vector<Message> messages;
  // Features in the order their summaries appear.
  std::vector<std::string> feature_order;
  std::size_t estimated_tokens = 0;
};

// Throws Error(kInvalidArgument) unless the sequence starts with exactly one
// system message, never repeats a role back to back and has no empty content.
void validate_conversation(const std::vector<Message>& messages);

// Builds the conversation sequences from a template set.
class PromptEngine {
 public:
  PromptEngine() : templates_(TemplateSet::defaults()) {}
  explicit PromptEngine(TemplateSet templates) : templates_(std::move(templates)) {}

  const TemplateSet& templates() const { return templates_; }

  Message system_prompt(const DatasetContext& ctx) const;

  // [system, user(dataset description), assistant(acknowledgment)].
  std::vector<Message> context_prefix(const DatasetContext& ctx) const;

  // The graph embedded verbatim between its type description and `question`.
  Message graph_message(const text::GraphText& graph,
                        std::string_view question) const;

  // context_prefix followed by the graph message carrying the first question.
  Conversation graph_conversation(const DatasetContext& ctx,
                                  const text::GraphText& graph,
                                  const TaskKind& task) const;

  // User turn `turn_index` (1-based) of the task, nullopt once the task has
  // no further turns. Throws for turn_index outside {1, 2, 3}.
  std::optional<Message> next_turn(const TaskKind& task, int turn_index) const;

  std::string question(const TaskKind& task) const;

  // One conversation holding every graph summary, most important first, and
  // the importance table. `graph_summaries` and `importances` are
  // (feature, value) pairs naming the same features.
  ModelSummaryPrompt model_summary_prompt(
      const DatasetContext& ctx,
      const std::vector<std::pair<std::string, std::string>>& graph_summaries,
      const std::vector<std::pair<std::string, double>>& importances,
      const text::TokenEstimator& estimator = {}) const;

 private:
  TemplateSet templates_;
};

// Convenience wrappers over a PromptEngine with the default templates.
Message build_system_prompt(const DatasetContext& ctx);
Conversation build_graph_conversation(const DatasetContext& ctx,
                                      const text::GraphText& graph,
                                      const TaskKind& task);
std::optional<Message> next_turn(const TaskKind& task, int turn_index);
ModelSummaryPrompt build_model_summary_prompt(
    const DatasetContext& ctx,
    const std::vector<std::pair<std::string, std::string>>& graph_summaries,
    const std::vector<std::pair<std::string, double>>& importances);

// Number of user turns the task runs for (describe: 3, largest_jump: 2,
// everything else: 1).
int turn_count(TaskType type);

}  // namespace gamtalk::prompt
