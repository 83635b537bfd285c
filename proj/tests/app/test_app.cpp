#include <doctest.h>

#include <cmath>
#include <fstream>

#include "gamtalk/app/config.hpp"
#include "gamtalk/app/csv.hpp"
#include "gamtalk/app/datasets.hpp"
#include "gamtalk/app/operations.hpp"
#include "gamtalk/app/store.hpp"
#include "gamtalk/error.hpp"
#include "gamtalk/file_util.hpp"
#include "gamtalk/gam/model_io.hpp"
#include "gamtalk/text/graph_text.hpp"
#include "support.hpp"

using namespace gamtalk;
using namespace gamtalk::app;

namespace {

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an error");
  return ErrorCode::kIo;
}

std::string message_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.what();
  }
  return "";
}

DatasetOptions shipped() {
  DatasetOptions o;
  o.data_dir = testing::data_dir();
  return o;
}

ModelEntry titanic_entry() {
  return {"titanic", "fixture", bundled_context("titanic"), testing::titanic_model()};
}

}  // namespace

TEST_CASE("csv parsing") {
  const auto t = parse_csv("\xEF\xBB\xBF" "a,b,c\r\n1,\"x, y\",\"say \"\"hi\"\"\"\n2,\"two\nlines\",\n");
  CHECK(t.header == std::vector<std::string>{"a", "b", "c"});
  REQUIRE(t.rows.size() == 2);
  CHECK(t.rows[0] == std::vector<std::string>{"1", "x, y", "say \"hi\""});
  CHECK(t.rows[1] == std::vector<std::string>{"2", "two\nlines", ""});
  CHECK(t.column("c") == 2);
  CHECK(code_of([&] { t.column("d"); }) == ErrorCode::kParse);

  CHECK(parse_csv("a\n1").rows.size() == 1);
  CHECK(parse_csv("a,b\n\n1,2\n\n").rows.size() == 1);
  CHECK(message_of([] { parse_csv("a,b\n1,2\n3\n"); }).find("line 3") != std::string::npos);
  CHECK(message_of([] { parse_csv("a,b\n\"1,2\n"); }).find("unterminated") != std::string::npos);
  CHECK(message_of([] { parse_csv("a,b\n1,x\"y\n"); }).find("line 2") != std::string::npos);
  CHECK(message_of([] { parse_csv("a,b\n\"1\"x,2\n"); }).find("after a closing quote") !=
        std::string::npos);
  CHECK(code_of([] { parse_csv(""); }) == ErrorCode::kParse);
  CHECK(code_of([] { read_csv("/nonexistent/file.csv"); }) == ErrorCode::kIo);
}

TEST_CASE("schema-driven tables") {
  const auto csv = parse_csv("x,c,y\n1,a,yes\nNA,b,no\n3,b,no\n");
  CsvSchema schema{{{"x", ColumnKind::kNumeric, ""}, {"c", ColumnKind::kCategorical, "cat"}},
                   "y",
                   [](const std::string& v) { return v == "yes" ? 1.0 : 0.0; }};
  const auto table = table_from_csv(csv, schema);
  CHECK(table.target == std::vector<double>{1, 0});
  CHECK(table.features[1].name == "cat");

  const auto bad = parse_csv("x,c,y\n1,a,yes\nhello,b,no\n");
  CHECK(message_of([&] { table_from_csv(bad, schema); }).find("row 3") != std::string::npos);

  const auto inferred = infer_table(parse_csv("n,s,t\n1,a,dead\n2,b,alive\n3,a,alive\n"), "t");
  CHECK(std::holds_alternative<std::vector<double>>(inferred.features[0].values));
  CHECK(std::holds_alternative<std::vector<std::string>>(inferred.features[1].values));
  CHECK(inferred.target == std::vector<double>{1, 0, 0});
  CHECK(code_of([] { infer_table(parse_csv("n,t\n1,a\n2,b\n3,c\n"), "t"); }) == ErrorCode::kParse);
  CHECK(is_missing("NA"));
  CHECK(is_missing(""));
  CHECK_FALSE(is_missing("0"));
}

TEST_CASE("bundled datasets") {
  CHECK(bundled_dataset_names().size() == 6);
  CHECK(bundled_context("titanic").description.find(
            "what sorts of people were more likely to survive?") != std::string::npos);
  CHECK(bundled_context("titanic").target_semantics ==
        "the logprobs to the probability that the passenger survived");

  const auto iris = load_bundled_dataset("iris", shipped());
  CHECK(iris.table.target_name == "is_setosa");
  CHECK(iris.table.row_count() == 150);
  double setosa = 0;
  for (double v : iris.table.target) setosa += v;
  CHECK(setosa == 50);

  const auto diabetes = load_bundled_dataset("diabetes", shipped());
  CHECK(diabetes.table.features.size() == 7);
  CHECK(diabetes.table.row_count() > 100);

  DatasetOptions syn;
  syn.seed = 5;
  syn.rows = 300;
  const auto a = load_bundled_dataset("synthetic_additive", syn);
  const auto b = load_bundled_dataset("synthetic_additive", syn);
  CHECK(a.table.features.size() == 20);
  CHECK(a.table.target == b.table.target);
  syn.seed = 6;
  CHECK(load_bundled_dataset("synthetic_additive", syn).table.target != a.table.target);
  CHECK(synthetic_effect("x1", 1.0) == std::sin(1.0));
  CHECK(synthetic_effect("x2", 1.0) == 0.5);
  CHECK(synthetic_effect("x7", 1.0) == 0.0);

  CHECK(code_of([] { load_bundled_dataset("mnist"); }) == ErrorCode::kNotFound);
  CHECK(code_of([] { bundled_context("mnist"); }) == ErrorCode::kNotFound);
  auto missing = shipped();
  missing.data_dir = "/nonexistent";
  CHECK(code_of([&] { load_bundled_dataset("titanic", missing); }) == ErrorCode::kNotFound);
}

TEST_CASE("user-supplied titanic CSV") {
  testing::TempDir dir("csv");
  {
    std::ofstream f(dir / "titanic.csv");
    f << "PassengerId,Survived,Pclass,Name,Sex,Age,SibSp,Parch,Ticket,Fare,Cabin,Embarked\n"
         "1,0,3,\"Braund, Mr. Owen Harris\",male,22,1,0,A/5 21171,7.25,,S\n"
         "2,1,1,\"Cumings, Mrs. John Bradley\",female,38,1,0,PC 17599,71.2833,C85,C\n"
         "3,1,3,\"Heikkinen, Miss. Laina\",female,26,0,0,STON/O2. 3101282,7.925,,S\n"
         "6,0,3,\"Moran, Mr. James\",male,,0,0,330877,8.4583,,Q\n";
  }
  DatasetOptions o;
  o.data_dir = dir.path();
  const auto ds = load_bundled_dataset("titanic", o);
  CHECK(ds.table.row_count() == 3);
  CHECK(ds.table.target == std::vector<double>{0, 1, 1});
  CHECK(ds.context.description == bundled_context("titanic").description);
}

TEST_CASE("full titanic conversation with the bundled description") {
  const auto entry = titanic_entry();
  const auto graph = text::render_graph_text(entry.model.terms[0]);
  const auto conv = prompt::build_graph_conversation(entry.context, graph,
                                                     prompt::TaskKind::describe());
  REQUIRE(conv.messages.size() == 4);
  CHECK(conv.messages[0].content.find("The y-axis depicts the contribution of the graph to the "
                                      "logprobs to the probability that the passenger "
                                      "survived.") != std::string::npos);
  CHECK(conv.messages[1].content == bundled_context("titanic").description);
  CHECK(conv.messages[3].content.find(graph.text) != std::string::npos);
}

TEST_CASE("store ids and atomic writes") {
  CHECK(valid_id("m-abc_1.2"));
  CHECK_FALSE(valid_id(""));
  CHECK_FALSE(valid_id(".hidden"));
  CHECK_FALSE(valid_id("a/b"));
  CHECK_FALSE(valid_id(std::string(65, 'a')));
  CHECK(valid_id(std::string(64, 'a')));

  testing::TempDir dir("atomic");
  const auto file = dir / "sub" / "f.txt";
  write_file_atomic(file, "one");
  write_file_atomic(file, "two");
  CHECK(read_file(file) == "two");
  std::size_t entries = 0;
  for ([[maybe_unused]] const auto& e : std::filesystem::directory_iterator(dir / "sub")) ++entries;
  CHECK(entries == 1);
}

TEST_CASE("model store") {
  testing::TempDir dir("models");
  StorePaths paths{dir.path()};
  ModelStore store(paths);
  const auto entry = titanic_entry();
  store.create(entry);
  CHECK(code_of([&] { store.create(entry); }) == ErrorCode::kConflict);
  CHECK(store.exists("titanic"));
  CHECK(store.list() == std::vector<std::string>{"titanic"});

  ModelStore reopened(paths);
  const auto back = reopened.get("titanic");
  CHECK(back.model == entry.model);
  CHECK(back.context.description == entry.context.description);
  CHECK(back.source == "fixture");
  CHECK(code_of([&] { reopened.get("other"); }) == ErrorCode::kNotFound);
  CHECK(code_of([&] { reopened.get("../x"); }) == ErrorCode::kNotFound);

  auto changed = entry;
  changed.model = apply_perturbation(entry.model, {std::string("Sex"), true, std::nullopt});
  reopened.replace(changed);
  CHECK(store.get("titanic").model == changed.model);
}

TEST_CASE("session store survives a reload") {
  testing::TempDir dir("sessions");
  StorePaths paths{dir.path()};
  prompt::PromptEngine engine;
  const auto entry = titanic_entry();
  SessionStore store(paths);
  auto s = start_session(entry, std::string("Age"), engine);
  s.id = store.new_id();
  CHECK(s.transcript.size() == 3);
  store.save(s);

  llm::ChatClient client(std::make_shared<llm::ScriptedTransport>(
                             std::vector<std::string>{"Children survived more often."}),
                         llm::ChatParams{});
  const auto reply = post_message(s, entry, "Describe the graph.", std::nullopt, client, engine,
                                  4096);
  CHECK(reply.content == "Children survived more often.");
  REQUIRE(s.transcript.size() == 5);
  CHECK(s.transcript[3].content.find("\"(2.0, 2.5)\": -0.308") != std::string::npos);
  store.save(s);

  const auto loaded = SessionStore(paths).load(s.id);
  CHECK(loaded.transcript == s.transcript);
  CHECK(loaded.feature == std::optional<std::string>("Age"));
  CHECK(loaded.model_id == "titanic");

  // The session is unchanged when the transport fails.
  llm::ChatClient empty(std::make_shared<llm::ScriptedTransport>(), llm::ChatParams{});
  auto copy = loaded;
  CHECK_THROWS(post_message(copy, entry, "again?", std::nullopt, empty, engine, 4096));
  CHECK(copy.transcript == loaded.transcript);

  std::ofstream(paths.transcript_file(s.id), std::ios::app) << "not json\n";
  CHECK(code_of([&] { SessionStore(paths).load(s.id); }) == ErrorCode::kParse);
  CHECK(code_of([&] { SessionStore(paths).load("s-missing"); }) == ErrorCode::kNotFound);
}

TEST_CASE("config") {
  const auto c = config_from_json({{"model_name", "gpt-4"}, {"token_budget", 500}, {"port", 0}});
  CHECK(c.model_name == "gpt-4");
  CHECK(c.token_budget == 500u);
  CHECK(config_from_json(config_to_json(c)).token_budget == 500u);
  CHECK_FALSE(AppConfig{}.token_budget.has_value());
  CHECK_FALSE(config_from_json(config_to_json(AppConfig{})).token_budget.has_value());
  CHECK(code_of([] { config_from_json({{"token_budget", 0}}); }) == ErrorCode::kInvalidArgument);
  CHECK(chat_params(c).model_name == "gpt-4");
  CHECK(message_of([] { config_from_json({{"modle_name", "x"}}); }).find("modle_name") !=
        std::string::npos);
  CHECK(code_of([] { config_from_json({{"concurrency_limit", 0}}); }) ==
        ErrorCode::kInvalidArgument);
  CHECK(code_of([] { config_from_json({{"port", "eighty"}}); }) == ErrorCode::kParse);
  CHECK(code_of([] { transport_kind_from_string("carrier-pigeon"); }) ==
        ErrorCode::kInvalidArgument);

  testing::TempDir dir("config");
  std::ofstream(dir / "c.json") << "{\"store_root\": \"/tmp/x\"}";
  CHECK(load_config(dir / "c.json").store_root == "/tmp/x");
  std::ofstream(dir / "bad.json") << "{";
  CHECK(code_of([&] { load_config(dir / "bad.json"); }) == ErrorCode::kParse);
}

TEST_CASE("fit settings from JSON") {
  const auto f = fit_config_from_json({{"outer_bags", 2}, {"link", "logit"}});
  CHECK(f.outer_bags == 2);
  CHECK(f.link == gam::Link::kLogit);
  CHECK(code_of([] { fit_config_from_json({{"bags", 2}}); }) == ErrorCode::kInvalidArgument);
  CHECK(code_of([] { fit_config_from_json({{"outer_bags", "two"}}); }) ==
        ErrorCode::kInvalidArgument);
  CHECK(code_of([] { fit_config_from_json({{"learning_rate", -1}}); }) ==
        ErrorCode::kInvalidArgument);
}

TEST_CASE("training a bundled dataset gives a stable content id") {
  gam::FitConfig fit;
  fit.outer_bags = 2;
  fit.random_seed = 1;
  const auto a = train_dataset_model("iris", shipped(), fit);
  const auto b = train_dataset_model("iris", shipped(), fit);
  CHECK(a.id == b.id);
  CHECK(a.id.rfind("m-", 0) == 0);
  CHECK(a.id.size() == 14);
  CHECK(a.model.link == gam::Link::kLogit);
  CHECK(a.model.terms.size() == 4);
  CHECK(a.source == "iris");
  CHECK(train_dataset_model("iris", shipped(), fit, std::string("mine")).id == "mine");
  CHECK(code_of([&] { train_dataset_model("iris", shipped(), fit, std::string("a/b")); }) ==
        ErrorCode::kInvalidArgument);
}

TEST_CASE("served graphs respect the budget") {
  const auto age = testing::age_term();
  const auto full = serve_graph(age, std::nullopt);
  CHECK_FALSE(full.simplified);
  CHECK(full.text.text == text::render_graph_text(age).text);
  CHECK(serve_graph(age, full.tokens).text.text == full.text.text);
  for (std::size_t budget : {full.tokens / 2, full.tokens * 3 / 4}) {
    const auto s = serve_graph(age, budget);
    CHECK(s.simplified);
    CHECK(s.tokens <= budget);
    CHECK(s.merges > 0);
    CHECK(text::TokenEstimator().count(s.text.text) == s.tokens);
  }
}

TEST_CASE("perturbation requests") {
  const auto m = testing::titanic_model();
  CHECK(apply_perturbation(apply_perturbation(m, {std::nullopt, true, std::nullopt}),
                           {std::nullopt, true, std::nullopt}) == m);
  CHECK(code_of([&] { apply_perturbation(m, {}); }) == ErrorCode::kInvalidArgument);
  CHECK(code_of([&] {
          apply_perturbation(m, {std::nullopt, false, std::pair{"male", "female"}});
        }) == ErrorCode::kInvalidArgument);
  const auto swapped = apply_perturbation(m, {"Sex", false, std::pair{"male", "female"}});
  CHECK(swapped.terms[1].means[0] == m.terms[1].means[1]);
}

TEST_CASE("describe and summarize follow the turn sequence") {
  const auto entry = titanic_entry();
  prompt::PromptEngine engine;
  auto transport = std::make_shared<llm::ScriptedTransport>(
      [](const std::vector<llm::Message>& m) { return "reply " + std::to_string(m.size()); });
  llm::ChatClient client(transport, llm::ChatParams{});
  const auto d = describe_graph(entry, "Age", client, engine, 4096);
  CHECK(d.responses == std::vector<std::string>{"reply 4", "reply 6", "reply 8"});
  CHECK(d.transcript.size() == 9);
  CHECK_THROWS_AS(describe_graph(entry, "Fare", client, engine, 4096), Error);

  const auto s = summarize_model(entry, client, engine, 4096);
  CHECK(s.descriptions.size() == 2);
  CHECK(s.prompt.feature_order == std::vector<std::string>{"Sex", "Age"});
  CHECK(s.summary == "reply 4");
  CHECK(s.prompt.messages.back().content.find("Summary: reply 8") != std::string::npos);
}
