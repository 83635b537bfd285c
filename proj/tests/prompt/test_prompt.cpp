#include <doctest.h>

#include <fstream>

#include "gamtalk/error.hpp"
#include "gamtalk/prompt/conversation.hpp"
#include "gamtalk/prompt/templates.hpp"
#include "gamtalk/text/graph_text.hpp"
#include "support.hpp"

using namespace gamtalk;
using namespace gamtalk::prompt;

namespace {

const DatasetContext kTitanic{
    "This is the titanic dataset from kaggle.",
    "the logprobs to the probability that the passenger survived"};

// The printed system prompt, paragraph breaks as blank lines.
const char* const kSystemPrompt =
    "You are an expert statistician and data scientist.\n\n"
    "You interpret global explanations produced by a generalized additive model (GAM). "
    "GAMs produce explanations in the form of graphs that contain the effect of a "
    "specific input feature.\n\n"
    "The user will first provide a general description of the dataset. Then you will be "
    "given graphs from the model, and the user will ask you questions about the graphs.\n\n"
    "Answer all questions to the best of your ability, combining both the data contained "
    "in the graph, the data set description you were given, and your knowledge about the "
    "real world.\n\n"
    "Graphs will be presented as a JSON object with keys representing the x-axis and "
    "values representing the y-axis. For continuous features, the keys are intervals that "
    "represent ranges where the function predicts the same value. For categorical "
    "features, each key represents a possible value that the feature can take. The y-axis "
    "depicts the contribution of the graph to the logprobs to the probability that the "
    "passenger survived.\n\n"
    "The user will provide graphs in the following format:\n"
    "    - The name of the feature depicted in the graph\n"
    "    - The type of the feature (continuous, categorical, or boolean)\n"
    "    - Mean values\n"
    "    - Lower bounds of confidence interval\n"
    "    - Upper bounds of confidence interval";

void check_alternation(const std::vector<Message>& messages) {
  CHECK_NOTHROW(validate_conversation(messages));
  CHECK(messages.front().role == Role::kSystem);
  for (std::size_t i = 1; i < messages.size(); ++i) {
    CHECK(messages[i].role != Role::kSystem);
    CHECK(messages[i].role != messages[i - 1].role);
  }
}

}  // namespace

TEST_CASE("system prompt is the printed text with the target substituted") {
  const auto m = build_system_prompt(kTitanic);
  CHECK(m.role == Role::kSystem);
  CHECK(m.content == kSystemPrompt);
  CHECK(m.content.find("expert statistician and data scientist") != std::string::npos);
  CHECK(m.content.find("    - Mean values") != std::string::npos);
  CHECK(m.content.find("    - Lower bounds of confidence interval") != std::string::npos);
  CHECK(build_system_prompt(kTitanic) == m);
}

TEST_CASE("describe conversation follows the printed three-turn sequence") {
  const auto graph = text::render_graph_text(testing::age_term());
  const auto conv = build_graph_conversation(kTitanic, graph, TaskKind::describe());
  REQUIRE(conv.messages.size() == 4);
  check_alternation(conv.messages);
  CHECK(conv.feature_name == "Age");
  CHECK(conv.messages[1] == Message{Role::kUser, kTitanic.description});
  CHECK(conv.messages[2].content ==
        "Thanks for this general description of the data set. Please continue and provide "
        "more information, for example about the graphs from the model.");
  CHECK(conv.messages[3].content ==
        "Consider the following graph from the model. This graph represents a "
        "continuous-valued feature. The keys are intervals that represent ranges where the "
        "function predicts the same value.\n\n" +
            graph.text + "\n\nPlease describe the general pattern of the graph.");

  CHECK(next_turn(TaskKind::describe(), 1)->content ==
        "Please describe the general pattern of the graph.");
  CHECK(next_turn(TaskKind::describe(), 2)->content ==
        "Great, now please study the graph carefully and highlight any regions you may find "
        "surprising or counterintuitive. You may also suggest an explanation for why this "
        "behavior is surprising, and what may have caused it.");
  CHECK(next_turn(TaskKind::describe(), 3)->content ==
        "Thanks. Now please provide a brief, at most 7 sentence summary of the influence of "
        "the feature on the outcome.");
}

TEST_CASE("graph message embeds the graph text verbatim") {
  const auto graph = text::render_graph_text(testing::sex_term());
  const auto conv = build_graph_conversation(kTitanic, graph, TaskKind::monotonicity());
  const auto& last = conv.messages.back().content;
  CHECK(last.find("\n\n" + graph.text + "\n\n") != std::string::npos);
  CHECK(last.find("This graph represents a categorical feature.") != std::string::npos);
  auto boolean = testing::sex_term();
  boolean.kind = gam::FeatureKind::kBoolean;
  const auto bconv = build_graph_conversation(kTitanic, text::render_graph_text(boolean),
                                              TaskKind::anomaly());
  CHECK(bconv.messages.back().content.find("This graph represents a boolean feature.") !=
        std::string::npos);
}

TEST_CASE("task questions") {
  PromptEngine e;
  CHECK(e.question(TaskKind::read_value(3.528)) ==
        "What is the mean value of the graph at 3.528?");
  CHECK(e.question(TaskKind::read_value(std::string("male"))) ==
        "What is the mean value of the graph at male?");
  CHECK(e.question(TaskKind::monotonicity()).find(
            "monotone increasing, monotone decreasing, or not monotone") != std::string::npos);
  CHECK(e.question(TaskKind::anomaly()) ==
        "Please study the graph carefully and highlight any patterns that are surprising or "
        "anti-causal given your knowledge of the real world.");
  CHECK(e.question(TaskKind::summarize_graph()).find("at most 7 sentence summary") !=
        std::string::npos);
  CHECK_THROWS_AS(e.question(TaskKind{TaskType::kReadValue, std::nullopt}), Error);
}

TEST_CASE("next_turn staging") {
  CHECK_FALSE(next_turn(TaskKind::anomaly(), 2).has_value());
  CHECK_FALSE(next_turn(TaskKind::monotonicity(), 2).has_value());
  CHECK_FALSE(next_turn(TaskKind::describe(), 3) == std::nullopt);
  const auto jump1 = next_turn(TaskKind::largest_jump(), 1);
  const auto jump2 = next_turn(TaskKind::largest_jump(), 2);
  REQUIRE(jump1);
  REQUIRE(jump2);
  CHECK(jump1->content.find("list a number of important jumps") != std::string::npos);
  CHECK(jump2->content.find("largest jump") != std::string::npos);
  CHECK_FALSE(next_turn(TaskKind::largest_jump(), 3).has_value());
  CHECK_THROWS_AS(next_turn(TaskKind::describe(), 0), Error);
  CHECK_THROWS_AS(next_turn(TaskKind::describe(), 4), Error);
  CHECK(turn_count(TaskType::kDescribe) == 3);
  CHECK(turn_count(TaskType::kLargestJump) == 2);
  CHECK(turn_count(TaskType::kReadValue) == 1);
}

TEST_CASE("conversation validation") {
  CHECK_THROWS_AS(validate_conversation({}), Error);
  CHECK_THROWS_AS(validate_conversation({{Role::kUser, "hi"}}), Error);
  CHECK_THROWS_AS(validate_conversation({{Role::kSystem, "s"}, {Role::kSystem, "t"}}), Error);
  CHECK_THROWS_AS(
      validate_conversation({{Role::kSystem, "s"}, {Role::kUser, "a"}, {Role::kUser, "b"}}),
      Error);
  CHECK_THROWS_AS(validate_conversation({{Role::kSystem, "s"}, {Role::kUser, ""}}), Error);
  CHECK_NOTHROW(validate_conversation(
      {{Role::kSystem, "s"}, {Role::kUser, "a"}, {Role::kAssistant, "b"}}));
  CHECK_THROWS_AS((DatasetContext{"", "x"}.validate()), Error);
  CHECK_THROWS_AS((DatasetContext{"x", ""}.validate()), Error);
}

TEST_CASE("model summary prompt orders by importance") {
  const auto p = build_model_summary_prompt(
      kTitanic, {{"sex", "Women survived more."}, {"age", "Children survived more."}},
      {{"sex", 0.4}, {"age", 1.2}});
  CHECK(p.feature_order == std::vector<std::string>{"age", "sex"});
  REQUIRE(p.messages.size() == 4);
  check_alternation(p.messages);
  const auto& body = p.messages.back().content;
  CHECK(body.find("- age: 1.2\n- sex: 0.4") != std::string::npos);
  CHECK(body.find("Feature Name: age\nSummary: Children survived more.") <
        body.find("Feature Name: sex\nSummary: Women survived more."));
  CHECK(body.find("summary of the model as a whole") != std::string::npos);
  std::size_t expected = 0;
  for (const auto& m : p.messages) expected += text::estimate_tokens(m.content);
  CHECK(p.estimated_tokens == expected);

  CHECK_THROWS_AS(build_model_summary_prompt(kTitanic, {}, {}), Error);
  CHECK_THROWS_AS(build_model_summary_prompt(kTitanic, {{"sex", "s"}}, {{"age", 1.0}}), Error);
  CHECK_THROWS_AS(build_model_summary_prompt(kTitanic, {{"sex", "s"}}, {}), Error);
  CHECK_THROWS_AS(
      build_model_summary_prompt(kTitanic, {{"sex", "s"}, {"sex", "t"}}, {{"sex", 1}, {"x", 1}}),
      Error);
}

TEST_CASE("templates: substitution and overrides") {
  CHECK(substitute("a {x} b {y} {x}", {{"x", "1"}}) == "a 1 b {y} 1");
  CHECK(substitute("{\"(0.0, 1.0)\": 2} {x}", {{"x", "{x}"}}) == "{\"(0.0, 1.0)\": 2} {x}");

  auto set = TemplateSet::defaults();
  for (const auto& name : TemplateSet::names()) CHECK_FALSE(set.raw(name).empty());
  CHECK_THROWS_AS(set.raw("nope"), Error);

  testing::TempDir dir("templates");
  {
    std::ofstream f(dir / "question_describe.txt");
    f << "Describe it.\n";
  }
  set.load_overrides(dir.path());
  CHECK(set.raw("question_describe") == "Describe it.");
  CHECK(set.raw("question_summary") == TemplateSet::defaults().raw("question_summary"));
  CHECK_THROWS_AS(set.load_overrides(dir / "missing"), Error);

  PromptEngine engine(set);
  CHECK(engine.next_turn(TaskKind::describe(), 1)->content == "Describe it.");
}

TEST_CASE("identical inputs give byte-identical conversations") {
  const auto graph = text::render_graph_text(testing::age_term());
  const auto a = build_graph_conversation(kTitanic, graph, TaskKind::read_value(30.0));
  const auto b = build_graph_conversation(kTitanic, graph, TaskKind::read_value(30.0));
  CHECK(a.messages == b.messages);
  CHECK(a.messages.back().content.find("What is the mean value of the graph at 30.0?") !=
        std::string::npos);
}
