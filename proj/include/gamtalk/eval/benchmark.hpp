#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "gamtalk/eval/grading.hpp"
#include "gamtalk/gam/types.hpp"
#include "gamtalk/llm/gateway.hpp"
#include "gamtalk/prompt/conversation.hpp"
#include "gamtalk/text/graph_text.hpp"

namespace gamtalk::eval {

inline constexpr const char* kReportSchemaVersion = "gamtalk-report/1";
inline constexpr int kReadValueCaseTarget = 75;

struct BenchmarkGraph {
  // Stable identifier, e.g. "iris/petal_length".
  std::string id;
  gam::GraphTerm term;
  prompt::DatasetContext context;
};

// Graphs of every term of `model`, ids prefixed with `model_id`.
std::vector<BenchmarkGraph> model_graphs(const gam::GamModel& model,
                                         const prompt::DatasetContext& context,
                                         const std::string& model_id);

struct BenchmarkConfig {
  // Any of read_value, monotonicity, largest_jump; run in that order.
  std::vector<prompt::TaskType> tasks = {prompt::TaskType::kReadValue,
                                         prompt::TaskType::kMonotonicity,
                                         prompt::TaskType::kLargestJump};
  std::uint64_t seed = 0;
  text::RenderOptions render;
  // Default: ceil(75 / graph count).
  std::optional<int> read_value_samples_per_graph;
  // Parallel cases when the transport allows it.
  int concurrency = 1;

  void validate() const;
};

struct BenchmarkCase {
  std::size_t index = 0;
  std::string graph_id;
  std::string variant = "original";
  prompt::TaskKind task;
  Truth truth;
  // The graph as shown to the model, and its exact rounded term.
  text::GraphText graph_text;
  gam::GraphTerm shown_term;
  prompt::DatasetContext context;
};

// Deterministic case list for the given seed. Graph terms are rounded to the
// render precision before the oracles run, so truths describe exactly what the
// model sees.
std::vector<BenchmarkCase> plan_benchmark(const std::vector<BenchmarkGraph>& graphs,
                                          const BenchmarkConfig& config);

int read_value_samples(const BenchmarkConfig& config, std::size_t graph_count);

struct TaskTally {
  prompt::TaskType task = prompt::TaskType::kReadValue;
  int successes = 0;
  int total = 0;
};

struct BenchmarkReport {
  std::string model_name;
  std::string transport;
  std::uint64_t seed = 0;
  int decimals = 3;
  std::size_t graph_count = 0;
  int read_value_samples_per_graph = 0;
  std::vector<TaskTally> tallies;
  std::vector<CaseVerdict> verdicts;
  // Cases whose rendered truth was not accepted, or whose empty answer was.
  std::vector<std::string> self_check_failures;

  const TaskTally* tally(prompt::TaskType task) const;
};

// Grader self-check: render_truth must pass and the empty answer must fail for
// every case. Returns one message per violation.
std::vector<std::string> self_check(const std::vector<BenchmarkCase>& cases,
                                    const GradeOptions& opts);

// Runs every case through `client`; transport errors make that case incorrect
// and never stop the run. Verdicts keep plan order.
BenchmarkReport run_benchmark(const std::vector<BenchmarkGraph>& graphs,
                              llm::ChatClient& client,
                              const BenchmarkConfig& config,
                              const prompt::PromptEngine& engine = {});

BenchmarkReport run_benchmark(const gam::GamModel& model,
                              const prompt::DatasetContext& context,
                              llm::ChatClient& client,
                              const BenchmarkConfig& config);

// Report rows: "Reading a Value from a Graph", "Deciding Monotonicity",
// "Finding the Largest Jump".
std::string_view task_label(prompt::TaskType task);

nlohmann::ordered_json report_to_json(const BenchmarkReport& report);
BenchmarkReport report_from_json(const nlohmann::json& j);
std::string serialize_report(const BenchmarkReport& report);
std::string render_report_table(const BenchmarkReport& report);
void save_report(const BenchmarkReport& report, const std::filesystem::path& path);

nlohmann::ordered_json truth_to_json(const Truth& truth);
Truth truth_from_json(const nlohmann::json& j);

// Scripted responders. The oracle echo answers the final turn of every planned
// case with render_truth and earlier turns with a short placeholder; the
// adversarial responder never states an answer.
llm::ScriptedTransport::Responder oracle_echo_responder(
    const std::vector<BenchmarkCase>& cases, const GradeOptions& opts,
    const prompt::PromptEngine& engine = {});
llm::ScriptedTransport::Responder adversarial_responder();

}  // namespace gamtalk::eval
