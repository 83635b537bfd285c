#include "gamtalk/eval/benchmark.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <map>
#include <thread>

#include "gamtalk/error.hpp"
#include "gamtalk/file_util.hpp"
#include "gamtalk/random.hpp"
#include "gamtalk/text/number_format.hpp"

namespace gamtalk::eval {
namespace {

using prompt::TaskType;

constexpr TaskType kBenchmarkTasks[] = {TaskType::kReadValue, TaskType::kMonotonicity,
                                        TaskType::kLargestJump};

std::vector<TaskType> ordered_tasks(const std::vector<TaskType>& requested) {
  std::vector<TaskType> out;
  for (TaskType t : kBenchmarkTasks) {
    if (std::find(requested.begin(), requested.end(), t) != requested.end()) {
      out.push_back(t);
    }
  }
  return out;
}

gam::FeatureValue sample_point(const gam::GraphTerm& term, int decimals, Rng& rng) {
  if (!term.is_continuous()) {
    return term.labels[rng.index(term.labels.size())];
  }
  const auto& edges = term.edges;
  double x = edges.front();
  // Points that land on an interior edge after rounding are redrawn so the
  // question never sits exactly on a bin boundary.
  for (int attempt = 0; attempt < 64; ++attempt) {
    x = text::round_to(rng.uniform(term.domain_min(), term.domain_max()), decimals);
    const bool inside = x >= term.domain_min() && x <= term.domain_max();
    const bool on_edge =
        std::find(edges.begin() + 1, edges.end() - 1, x) != edges.end() - 1;
    if (inside && !on_edge) break;
  }
  return std::clamp(x, term.domain_min(), term.domain_max());
}

nlohmann::ordered_json point_to_json(const gam::FeatureValue& x) {
  if (const double* d = std::get_if<double>(&x)) return *d;
  return std::get<std::string>(x);
}

gam::FeatureValue point_from_json(const nlohmann::json& j) {
  if (j.is_string()) return j.get<std::string>();
  return j.get<double>();
}

nlohmann::ordered_json candidate_to_json(const JumpCandidate& c) {
  nlohmann::ordered_json j;
  j["index"] = c.jump.index;
  j["boundary_x"] = c.jump.boundary_x;
  j["delta"] = c.jump.delta;
  j["magnitude"] = c.jump.magnitude;
  j["before"] = c.before;
  j["after"] = c.after;
  j["width"] = c.width;
  return j;
}

JumpCandidate candidate_from_json(const nlohmann::json& j) {
  JumpCandidate c;
  c.jump.index = j.at("index").get<std::size_t>();
  c.jump.boundary_x = j.at("boundary_x").get<double>();
  c.jump.delta = j.at("delta").get<double>();
  c.jump.magnitude = j.at("magnitude").get<double>();
  c.before = j.at("before").get<double>();
  c.after = j.at("after").get<double>();
  c.width = j.at("width").get<double>();
  return c;
}

struct MonotonicityDetail {
  int monotone_total = 0;
  int monotone_correct = 0;
  int non_monotone_total = 0;
  int claimed_monotone = 0;
};

MonotonicityDetail monotonicity_detail(const BenchmarkReport& report) {
  MonotonicityDetail d;
  for (const auto& v : report.verdicts) {
    if (v.task.type != TaskType::kMonotonicity) continue;
    if (std::get<MonotonicityClass>(v.truth) == MonotonicityClass::kNotMonotone) {
      ++d.non_monotone_total;
      if (!v.correct && v.parsed_answer) ++d.claimed_monotone;
    } else {
      ++d.monotone_total;
      if (v.correct) ++d.monotone_correct;
    }
  }
  return d;
}

std::string fraction(int num, int den) {
  return std::to_string(num) + "/" + std::to_string(den);
}

CaseVerdict run_case(const BenchmarkCase& c, llm::ChatClient& client,
                     const prompt::PromptEngine& engine, const GradeOptions& opts) {
  std::vector<std::string> responses;
  CaseVerdict v;
  try {
    auto conv = engine.graph_conversation(c.context, c.graph_text, c.task);
    const int turns = prompt::turn_count(c.task.type);
    for (int turn = 1; turn <= turns; ++turn) {
      if (turn > 1) conv.messages.push_back(*engine.next_turn(c.task, turn));
      auto reply = client.complete(conv.messages);
      responses.push_back(reply.content);
      conv.messages.push_back(std::move(reply));
    }
    v = grade_case(c.task, c.truth, responses.back(), opts);
  } catch (const llm::TransportError& e) {
    v = CaseVerdict{};
    v.error = e.what();
    v.attempts = e.attempts();
  } catch (const Error& e) {
    v = CaseVerdict{};
    v.error = e.what();
  }
  v.index = c.index;
  v.graph_id = c.graph_id;
  v.variant = c.variant;
  v.task = c.task;
  v.truth = c.truth;
  v.question = engine.question(c.task);
  v.responses = std::move(responses);
  if (v.error) {
    v.correct = false;
    v.llm_answer = v.responses.empty() ? "" : v.responses.back();
  }
  if (c.task.type == TaskType::kMonotonicity) {
    v.near_monotonicity = near_monotonicity(c.shown_term);
  }
  return v;
}

}  // namespace

std::vector<BenchmarkGraph> model_graphs(const gam::GamModel& model,
                                         const prompt::DatasetContext& context,
                                         const std::string& model_id) {
  std::vector<BenchmarkGraph> out;
  for (const auto& term : model.terms) {
    out.push_back({model_id + "/" + term.feature_name, term, context});
  }
  return out;
}

void BenchmarkConfig::validate() const {
  if (tasks.empty()) throw Error(ErrorCode::kInvalidArgument, "no benchmark tasks");
  for (TaskType t : tasks) {
    if (std::find(std::begin(kBenchmarkTasks), std::end(kBenchmarkTasks), t) ==
        std::end(kBenchmarkTasks)) {
      throw Error(ErrorCode::kInvalidArgument,
                  "task '" + std::string(prompt::to_string(t)) +
                      "' is not a benchmark task");
    }
  }
  render.validate();
  if (read_value_samples_per_graph && *read_value_samples_per_graph < 1) {
    throw Error(ErrorCode::kInvalidArgument, "read_value samples must be >= 1");
  }
  if (concurrency < 1) {
    throw Error(ErrorCode::kInvalidArgument, "concurrency must be >= 1");
  }
}

int read_value_samples(const BenchmarkConfig& config, std::size_t graph_count) {
  if (config.read_value_samples_per_graph) return *config.read_value_samples_per_graph;
  if (graph_count == 0) return 0;
  const auto n = static_cast<int>(graph_count);
  return (kReadValueCaseTarget + n - 1) / n;
}

std::vector<BenchmarkCase> plan_benchmark(const std::vector<BenchmarkGraph>& graphs,
                                          const BenchmarkConfig& config) {
  config.validate();
  if (graphs.empty()) throw Error(ErrorCode::kInvalidArgument, "no graphs to evaluate");
  const int decimals = config.render.decimals;

  struct Shown {
    gam::GraphTerm term;
    text::GraphText text;
  };
  std::vector<Shown> shown;
  for (const auto& g : graphs) {
    g.term.validate();
    g.context.validate();
    auto term = text::round_term(g.term, config.render);
    auto rendered = text::render_graph_text(term, config.render);
    shown.push_back({std::move(term), std::move(rendered)});
  }

  std::vector<BenchmarkCase> cases;
  auto add = [&](std::size_t g, std::string variant, prompt::TaskKind task,
                 Truth truth, const gam::GraphTerm& term, text::GraphText text) {
    BenchmarkCase c;
    c.index = cases.size();
    c.graph_id = graphs[g].id;
    c.variant = std::move(variant);
    c.task = std::move(task);
    c.truth = std::move(truth);
    c.shown_term = term;
    c.graph_text = std::move(text);
    c.context = graphs[g].context;
    cases.push_back(std::move(c));
  };

  Rng rng(config.seed);
  for (TaskType task : ordered_tasks(config.tasks)) {
    for (std::size_t g = 0; g < graphs.size(); ++g) {
      const auto& s = shown[g];
      switch (task) {
        case TaskType::kReadValue: {
          const int samples = read_value_samples(config, graphs.size());
          for (int k = 0; k < samples; ++k) {
            auto x = sample_point(s.term, decimals, rng);
            const double truth = oracle_value_at(s.term, x);
            add(g, "original", prompt::TaskKind::read_value(x), truth, s.term, s.text);
          }
          break;
        }
        case TaskType::kMonotonicity: {
          add(g, "original", prompt::TaskKind::monotonicity(),
              oracle_monotonicity(s.term), s.term, s.text);
          auto inverted = perturb_invert_y(s.term);
          auto text = text::render_graph_text(inverted, config.render);
          add(g, "inverted", prompt::TaskKind::monotonicity(),
              oracle_monotonicity(inverted), inverted, std::move(text));
          break;
        }
        case TaskType::kLargestJump:
          if (s.term.is_continuous() && s.term.bin_count() >= 2) {
            add(g, "original", prompt::TaskKind::largest_jump(),
                jump_truth(s.term, decimals), s.term, s.text);
          }
          break;
        default:
          break;
      }
    }
  }
  return cases;
}

std::vector<std::string> self_check(const std::vector<BenchmarkCase>& cases,
                                    const GradeOptions& opts) {
  std::vector<std::string> failures;
  for (const auto& c : cases) {
    const std::string label = "case " + std::to_string(c.index) + " (" + c.graph_id +
                              ", " + std::string(prompt::to_string(c.task.type)) + ")";
    if (!grade_case(c.task, c.truth, render_truth(c.truth, opts), opts).correct) {
      failures.push_back(label + ": rendered truth graded incorrect");
    }
    if (grade_case(c.task, c.truth, "", opts).correct) {
      failures.push_back(label + ": empty answer graded correct");
    }
  }
  return failures;
}

const TaskTally* BenchmarkReport::tally(prompt::TaskType task) const {
  for (const auto& t : tallies) {
    if (t.task == task) return &t;
  }
  return nullptr;
}

BenchmarkReport run_benchmark(const std::vector<BenchmarkGraph>& graphs,
                              llm::ChatClient& client, const BenchmarkConfig& config,
                              const prompt::PromptEngine& engine) {
  const auto cases = plan_benchmark(graphs, config);
  const GradeOptions opts{config.render.decimals};

  BenchmarkReport report;
  report.model_name = client.params().model_name;
  report.transport = client.transport().name();
  report.seed = config.seed;
  report.decimals = config.render.decimals;
  report.graph_count = graphs.size();
  report.read_value_samples_per_graph = read_value_samples(config, graphs.size());
  report.self_check_failures = self_check(cases, opts);
  report.verdicts.resize(cases.size());

  const bool parallel = config.concurrency > 1 && client.transport().concurrent();
  if (parallel) {
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
      for (std::size_t i = next++; i < cases.size(); i = next++) {
        report.verdicts[i] = run_case(cases[i], client, engine, opts);
      }
    };
    std::vector<std::thread> threads;
    const auto n = std::min<std::size_t>(static_cast<std::size_t>(config.concurrency),
                                         cases.size());
    for (std::size_t t = 0; t < n; ++t) threads.emplace_back(worker);
    for (auto& t : threads) t.join();
  } else {
    for (std::size_t i = 0; i < cases.size(); ++i) {
      report.verdicts[i] = run_case(cases[i], client, engine, opts);
    }
  }

  for (TaskType task : ordered_tasks(config.tasks)) {
    TaskTally tally{task, 0, 0};
    for (const auto& v : report.verdicts) {
      if (v.task.type != task) continue;
      ++tally.total;
      if (v.correct) ++tally.successes;
    }
    report.tallies.push_back(tally);
  }
  return report;
}

BenchmarkReport run_benchmark(const gam::GamModel& model,
                              const prompt::DatasetContext& context,
                              llm::ChatClient& client, const BenchmarkConfig& config) {
  if (model.terms.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "model has no terms to evaluate");
  }
  return run_benchmark(model_graphs(model, context, "model"), client, config);
}

std::string_view task_label(prompt::TaskType task) {
  switch (task) {
    case TaskType::kReadValue:
      return "Reading a Value from a Graph";
    case TaskType::kMonotonicity:
      return "Deciding Monotonicity";
    case TaskType::kLargestJump:
      return "Finding the Largest Jump";
    default:
      return prompt::to_string(task);
  }
}

nlohmann::ordered_json truth_to_json(const Truth& truth) {
  nlohmann::ordered_json j;
  if (const double* value = std::get_if<double>(&truth)) {
    j["kind"] = "value";
    j["value"] = *value;
  } else if (const auto* cls = std::get_if<MonotonicityClass>(&truth)) {
    j["kind"] = "monotonicity";
    j["class"] = std::string(to_string(*cls));
  } else {
    j["kind"] = "largest_jump";
    auto arr = nlohmann::ordered_json::array();
    for (const auto& c : std::get<JumpTruth>(truth).candidates) {
      arr.push_back(candidate_to_json(c));
    }
    j["candidates"] = std::move(arr);
  }
  return j;
}

Truth truth_from_json(const nlohmann::json& j) {
  const auto kind = j.at("kind").get<std::string>();
  if (kind == "value") return j.at("value").get<double>();
  if (kind == "monotonicity") {
    return monotonicity_from_string(j.at("class").get<std::string>());
  }
  if (kind == "largest_jump") {
    JumpTruth t;
    for (const auto& c : j.at("candidates")) t.candidates.push_back(candidate_from_json(c));
    if (t.candidates.empty()) throw Error(ErrorCode::kParse, "jump truth has no candidates");
    return t;
  }
  throw Error(ErrorCode::kParse, "unknown truth kind '" + kind + "'");
}

nlohmann::ordered_json report_to_json(const BenchmarkReport& report) {
  nlohmann::ordered_json j;
  j["version"] = kReportSchemaVersion;
  j["model_name"] = report.model_name;
  j["transport"] = report.transport;
  j["seed"] = report.seed;
  j["decimals"] = report.decimals;
  j["graph_count"] = report.graph_count;
  j["read_value_samples_per_graph"] = report.read_value_samples_per_graph;
  j["read_value_allocation"] = "equal samples per graph, ceil(75 / graph_count) by default";
  auto tallies = nlohmann::ordered_json::array();
  for (const auto& t : report.tallies) {
    tallies.push_back({{"task", std::string(prompt::to_string(t.task))},
                       {"label", std::string(task_label(t.task))},
                       {"successes", t.successes},
                       {"total", t.total}});
  }
  j["tasks"] = std::move(tallies);
  if (report.tally(TaskType::kMonotonicity) != nullptr) {
    const auto d = monotonicity_detail(report);
    j["monotonicity_detail"] = {{"monotone_total", d.monotone_total},
                                {"monotone_correct", d.monotone_correct},
                                {"non_monotone_total", d.non_monotone_total},
                                {"claimed_monotone", d.claimed_monotone}};
  }
  j["self_check_failures"] = report.self_check_failures;
  auto cases = nlohmann::ordered_json::array();
  for (const auto& v : report.verdicts) {
    nlohmann::ordered_json c;
    c["index"] = v.index;
    c["graph_id"] = v.graph_id;
    c["variant"] = v.variant;
    c["task"] = std::string(prompt::to_string(v.task.type));
    if (v.task.point) c["point"] = point_to_json(*v.task.point);
    c["truth"] = truth_to_json(v.truth);
    c["question"] = v.question;
    c["responses"] = v.responses;
    c["llm_answer"] = v.llm_answer;
    c["parsed_answer"] = v.parsed_answer ? nlohmann::ordered_json(*v.parsed_answer)
                                         : nlohmann::ordered_json(nullptr);
    c["correct"] = v.correct;
    c["unparseable"] = v.unparseable;
    if (v.error) c["error"] = *v.error;
    if (v.attempts) c["attempts"] = *v.attempts;
    if (v.near_monotonicity) c["near_monotonicity"] = *v.near_monotonicity;
    cases.push_back(std::move(c));
  }
  j["cases"] = std::move(cases);
  return j;
}

BenchmarkReport report_from_json(const nlohmann::json& j) {
  try {
    if (j.at("version").get<std::string>() != kReportSchemaVersion) {
      throw Error(ErrorCode::kParse, "unsupported report version " +
                                         j.at("version").dump());
    }
    BenchmarkReport r;
    r.model_name = j.at("model_name").get<std::string>();
    r.transport = j.at("transport").get<std::string>();
    r.seed = j.at("seed").get<std::uint64_t>();
    r.decimals = j.at("decimals").get<int>();
    r.graph_count = j.at("graph_count").get<std::size_t>();
    r.read_value_samples_per_graph = j.at("read_value_samples_per_graph").get<int>();
    for (const auto& t : j.at("tasks")) {
      r.tallies.push_back({prompt::task_type_from_string(t.at("task").get<std::string>()),
                           t.at("successes").get<int>(), t.at("total").get<int>()});
    }
    r.self_check_failures = j.at("self_check_failures").get<std::vector<std::string>>();
    for (const auto& c : j.at("cases")) {
      CaseVerdict v;
      v.index = c.at("index").get<std::size_t>();
      v.graph_id = c.at("graph_id").get<std::string>();
      v.variant = c.at("variant").get<std::string>();
      v.task.type = prompt::task_type_from_string(c.at("task").get<std::string>());
      if (c.contains("point")) v.task.point = point_from_json(c.at("point"));
      v.truth = truth_from_json(c.at("truth"));
      v.question = c.at("question").get<std::string>();
      v.responses = c.at("responses").get<std::vector<std::string>>();
      v.llm_answer = c.at("llm_answer").get<std::string>();
      if (!c.at("parsed_answer").is_null()) {
        v.parsed_answer = c.at("parsed_answer").get<std::string>();
      }
      v.correct = c.at("correct").get<bool>();
      v.unparseable = c.at("unparseable").get<bool>();
      if (c.contains("error")) v.error = c.at("error").get<std::string>();
      if (c.contains("attempts")) v.attempts = c.at("attempts").get<int>();
      if (c.contains("near_monotonicity")) {
        v.near_monotonicity = c.at("near_monotonicity").get<double>();
      }
      r.verdicts.push_back(std::move(v));
    }
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kParse, std::string("malformed report: ") + e.what());
  }
}

std::string serialize_report(const BenchmarkReport& report) {
  return report_to_json(report).dump(2) + "\n";
}

std::string render_report_table(const BenchmarkReport& report) {
  std::size_t label_width = 4;
  for (const auto& t : report.tallies) {
    label_width = std::max(label_width, task_label(t.task).size());
  }
  auto pad = [&](std::string_view s) {
    std::string out(s);
    out.append(label_width + 4 - s.size(), ' ');
    return out;
  };
  std::string out = pad("Task") + report.model_name + "\n";
  for (const auto& t : report.tallies) {
    out += pad(task_label(t.task)) + fraction(t.successes, t.total) + "\n";
  }
  if (report.tally(TaskType::kMonotonicity) != nullptr) {
    const auto d = monotonicity_detail(report);
    out += "\nMonotone graphs identified: " +
           fraction(d.monotone_correct, d.monotone_total) + "\n";
    out += "Non-monotone graphs claimed monotone: " +
           fraction(d.claimed_monotone, d.non_monotone_total) + "\n";
  }
  out += "\nTransport: " + report.transport + ", seed " + std::to_string(report.seed) +
         ", " + std::to_string(report.graph_count) + " graphs, " +
         std::to_string(report.decimals) + " decimals";
  if (report.tally(TaskType::kReadValue) != nullptr) {
    out += ", " + std::to_string(report.read_value_samples_per_graph) +
           " read-value points per graph";
  }
  out += "\n";
  if (!report.self_check_failures.empty()) {
    out += "Grader self-check failures: " +
           std::to_string(report.self_check_failures.size()) + "\n";
  }
  return out;
}

void save_report(const BenchmarkReport& report, const std::filesystem::path& path) {
  write_file_atomic(path, serialize_report(report));
}

llm::ScriptedTransport::Responder oracle_echo_responder(
    const std::vector<BenchmarkCase>& cases, const GradeOptions& opts,
    const prompt::PromptEngine& engine) {
  struct Entry {
    std::string answer;
    int turns = 1;
  };
  auto table = std::make_shared<std::map<std::string, Entry>>();
  for (const auto& c : cases) {
    auto conv = engine.graph_conversation(c.context, c.graph_text, c.task);
    (*table)[conv.messages.back().content] = {render_truth(c.truth, opts),
                                              prompt::turn_count(c.task.type)};
  }
  return [table](const std::vector<llm::Message>& messages) -> std::string {
    constexpr std::size_t kGraphTurn = 3;
    if (messages.size() <= kGraphTurn) return "unknown";
    auto it = table->find(messages[kGraphTurn].content);
    if (it == table->end()) return "unknown";
    int user_turns = 0;
    for (std::size_t i = kGraphTurn; i < messages.size(); ++i) {
      if (messages[i].role == prompt::Role::kUser) ++user_turns;
    }
    return user_turns >= it->second.turns ? it->second.answer
                                          : "I will look at the graph step by step.";
  };
}

llm::ScriptedTransport::Responder adversarial_responder() {
  return [](const std::vector<llm::Message>&) -> std::string {
    return "I am unable to determine that from the information given.";
  };
}

}  // namespace gamtalk::eval
