#include "gamtalk/prompt/conversation.hpp"

#include <algorithm>
#include <numeric>
#include <set>

#include "gamtalk/error.hpp"
#include "gamtalk/text/number_format.hpp"

namespace gamtalk::prompt {
namespace {

[[noreturn]] void invalid(const std::string& message) {
  throw Error(ErrorCode::kInvalidArgument, message);
}

std::string header_field(const text::GraphText& graph, std::string_view field) {
  const std::string& s = graph.text;
  std::size_t pos = 0;
  while (pos < s.size()) {
    const auto end = std::min(s.find('\n', pos), s.size());
    std::string_view line(s.data() + pos, end - pos);
    if (line.substr(0, field.size()) == field) {
      return std::string(line.substr(field.size()));
    }
    pos = end + 1;
  }
  throw Error(ErrorCode::kParse,
              "graph text lacks '" + std::string(field.substr(0, field.size() - 2)) + "'");
}

gam::FeatureKind graph_kind(const text::GraphText& graph) {
  return gam::feature_kind_from_string(header_field(graph, "Feature Type: "));
}

std::string point_text(const gam::FeatureValue& x) {
  if (const double* d = std::get_if<double>(&x)) return text::float_repr(*d);
  return std::get<std::string>(x);
}

}  // namespace

std::string_view to_string(Role role) {
  switch (role) {
    case Role::kSystem:
      return "system";
    case Role::kUser:
      return "user";
    case Role::kAssistant:
      return "assistant";
  }
  return "user";
}

Role role_from_string(std::string_view text) {
  if (text == "system") return Role::kSystem;
  if (text == "user") return Role::kUser;
  if (text == "assistant") return Role::kAssistant;
  throw Error(ErrorCode::kParse, "unknown role '" + std::string(text) + "'");
}

std::string_view to_string(TaskType type) {
  switch (type) {
    case TaskType::kDescribe:
      return "describe";
    case TaskType::kReadValue:
      return "read_value";
    case TaskType::kMonotonicity:
      return "monotonicity";
    case TaskType::kLargestJump:
      return "largest_jump";
    case TaskType::kAnomaly:
      return "anomaly";
    case TaskType::kSummarizeGraph:
      return "summarize_graph";
    case TaskType::kSummarizeModel:
      return "summarize_model";
  }
  return "describe";
}

TaskType task_type_from_string(std::string_view text) {
  for (auto t : {TaskType::kDescribe, TaskType::kReadValue,
                 TaskType::kMonotonicity, TaskType::kLargestJump,
                 TaskType::kAnomaly, TaskType::kSummarizeGraph,
                 TaskType::kSummarizeModel}) {
    if (to_string(t) == text) return t;
  }
  throw Error(ErrorCode::kInvalidArgument,
              "unknown task '" + std::string(text) + "'");
}

int turn_count(TaskType type) {
  switch (type) {
    case TaskType::kDescribe:
      return 3;
    case TaskType::kLargestJump:
      return 2;
    default:
      return 1;
  }
}

void DatasetContext::validate() const {
  if (description.empty()) invalid("dataset description is empty");
  if (target_semantics.empty()) invalid("target semantics are empty");
}

void validate_conversation(const std::vector<Message>& messages) {
  if (messages.empty()) invalid("conversation is empty");
  if (messages.front().role != Role::kSystem) {
    invalid("conversation must start with a system message");
  }
  for (std::size_t i = 0; i < messages.size(); ++i) {
    if (messages[i].content.empty()) {
      invalid("message " + std::to_string(i) + " has empty content");
    }
    if (i > 0 && messages[i].role == Role::kSystem) {
      invalid("conversation has more than one system message");
    }
    if (i > 0 && messages[i].role == messages[i - 1].role) {
      invalid("messages " + std::to_string(i - 1) + " and " +
              std::to_string(i) + " share the role " +
              std::string(to_string(messages[i].role)));
    }
  }
}

Message PromptEngine::system_prompt(const DatasetContext& ctx) const {
  return {Role::kSystem,
          templates_.render("system",
                            {{"target_semantics", ctx.target_semantics}})};
}

std::vector<Message> PromptEngine::context_prefix(
    const DatasetContext& ctx) const {
  ctx.validate();
  return {system_prompt(ctx),
          {Role::kUser, ctx.description},
          {Role::kAssistant, templates_.raw("dataset_acknowledgment")}};
}

Message PromptEngine::graph_message(const text::GraphText& graph,
                                    std::string_view question) const {
  std::string description_name;
  switch (graph_kind(graph)) {
    case gam::FeatureKind::kContinuous:
      description_name = "graph_description_continuous";
      break;
    case gam::FeatureKind::kCategorical:
      description_name = "graph_description_categorical";
      break;
    case gam::FeatureKind::kBoolean:
      description_name = "graph_description_boolean";
      break;
  }
  return {Role::kUser,
          templates_.render("graph_message",
                            {{"graph_description", templates_.raw(description_name)},
                             {"graph", graph.text},
                             {"question", std::string(question)}})};
}

std::string PromptEngine::question(const TaskKind& task) const {
  switch (task.type) {
    case TaskType::kDescribe:
      return templates_.raw("question_describe");
    case TaskType::kReadValue:
      if (!task.point) invalid("read_value task needs a query point");
      return templates_.render("question_read_value",
                               {{"x", point_text(*task.point)}});
    case TaskType::kMonotonicity:
      return templates_.raw("question_monotonicity");
    case TaskType::kLargestJump:
      return templates_.raw("question_jumps_list");
    case TaskType::kAnomaly:
      return templates_.raw("question_anomaly");
    case TaskType::kSummarizeGraph:
      return templates_.raw("question_summarize_graph");
    case TaskType::kSummarizeModel:
      break;
  }
  invalid("summarize_model is built with model_summary_prompt");
}

Conversation PromptEngine::graph_conversation(const DatasetContext& ctx,
                                              const text::GraphText& graph,
                                              const TaskKind& task) const {
  Conversation out;
  out.task = task;
  out.feature_name = header_field(graph, "Feature Name: ");
  out.messages = context_prefix(ctx);
  out.messages.push_back(graph_message(graph, question(task)));
  return out;
}

std::optional<Message> PromptEngine::next_turn(const TaskKind& task,
                                               int turn_index) const {
  if (turn_index < 1 || turn_index > 3) {
    invalid("turn index " + std::to_string(turn_index) +
            " outside {1, 2, 3}");
  }
  if (turn_index == 1) return Message{Role::kUser, question(task)};
  if (task.type == TaskType::kDescribe) {
    return Message{Role::kUser, templates_.raw(turn_index == 2
                                                   ? "question_surprises"
                                                   : "question_summary")};
  }
  if (task.type == TaskType::kLargestJump && turn_index == 2) {
    return Message{Role::kUser, templates_.raw("question_jumps_largest")};
  }
  return std::nullopt;
}

ModelSummaryPrompt PromptEngine::model_summary_prompt(
    const DatasetContext& ctx,
    const std::vector<std::pair<std::string, std::string>>& graph_summaries,
    const std::vector<std::pair<std::string, double>>& importances,
    const text::TokenEstimator& estimator) const {
  if (graph_summaries.empty()) invalid("model summary needs graph summaries");
  if (graph_summaries.size() != importances.size()) {
    invalid("summary/importance name mismatch: " +
            std::to_string(graph_summaries.size()) + " summaries, " +
            std::to_string(importances.size()) + " importances");
  }
  std::set<std::string_view> summary_names;
  for (const auto& [name, summary] : graph_summaries) {
    if (summary.empty()) invalid("empty summary for feature '" + name + "'");
    if (!summary_names.insert(name).second) {
      invalid("duplicate summary for feature '" + name + "'");
    }
  }
  for (const auto& [name, value] : importances) {
    if (summary_names.count(name) == 0) {
      invalid("summary/importance name mismatch: no summary for '" + name + "'");
    }
  }

  std::vector<std::size_t> order(importances.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return importances[a].second > importances[b].second;
  });

  ModelSummaryPrompt out;
  std::string table;
  std::string summaries;
  for (std::size_t idx : order) {
    const auto& name = importances[idx].first;
    out.feature_order.push_back(name);
    if (!table.empty()) table += "\n";
    table += "- " + name + ": " + text::format_rounded(importances[idx].second, 3);
    auto it = std::find_if(graph_summaries.begin(), graph_summaries.end(),
                           [&](const auto& s) { return s.first == name; });
    if (!summaries.empty()) summaries += "\n\n";
    summaries += "Feature Name: " + name + "\nSummary: " + it->second;
  }
  out.messages = context_prefix(ctx);
  out.messages.push_back(
      {Role::kUser, templates_.render("model_summary", {{"importances", table},
                                                        {"summaries", summaries}})});
  for (const auto& m : out.messages) out.estimated_tokens += estimator.count(m.content);
  return out;
}

Message build_system_prompt(const DatasetContext& ctx) {
  return PromptEngine().system_prompt(ctx);
}

Conversation build_graph_conversation(const DatasetContext& ctx,
                                      const text::GraphText& graph,
                                      const TaskKind& task) {
  return PromptEngine().graph_conversation(ctx, graph, task);
}

std::optional<Message> next_turn(const TaskKind& task, int turn_index) {
  return PromptEngine().next_turn(task, turn_index);
}

ModelSummaryPrompt build_model_summary_prompt(
    const DatasetContext& ctx,
    const std::vector<std::pair<std::string, std::string>>& graph_summaries,
    const std::vector<std::pair<std::string, double>>& importances) {
  return PromptEngine().model_summary_prompt(ctx, graph_summaries, importances);
}

}  // namespace gamtalk::prompt
