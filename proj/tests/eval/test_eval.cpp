#include <doctest.h>

#include <cmath>
#include <mutex>

#include "gamtalk/error.hpp"
#include "gamtalk/eval/benchmark.hpp"
#include "gamtalk/eval/grading.hpp"
#include "gamtalk/eval/oracles.hpp"
#include "gamtalk/text/number_format.hpp"
#include "support.hpp"

using namespace gamtalk;
using namespace gamtalk::eval;
using prompt::TaskKind;
using prompt::TaskType;

namespace {

gam::GraphTerm steps(std::vector<double> edges, std::vector<double> means) {
  gam::GraphTerm t;
  t.feature_name = "x";
  t.edges = std::move(edges);
  t.means = means;
  t.lower_ci = means;
  t.upper_ci = means;
  t.weights.assign(means.size(), 1.0);
  return t;
}

std::string brute_name(MonotonicityClass c) { return std::string(to_string(c)); }

const prompt::DatasetContext kContext{"A dataset.", "the predicted outcome"};

std::vector<BenchmarkGraph> titanic_graphs() {
  return model_graphs(testing::titanic_model(), kContext, "titanic");
}

// Oracle replies from a transport that allows parallel sends.
class ConcurrentOracle : public llm::Transport {
 public:
  explicit ConcurrentOracle(llm::ScriptedTransport::Responder r) : responder_(std::move(r)) {}
  llm::Message send(const std::vector<llm::Message>& messages, const llm::ChatParams&) override {
    return {prompt::Role::kAssistant, responder_(messages)};
  }
  std::string name() const override { return "scripted"; }
  bool concurrent() const override { return true; }

 private:
  llm::ScriptedTransport::Responder responder_;
};

class FailingTransport : public llm::Transport {
 public:
  llm::Message send(const std::vector<llm::Message>&, const llm::ChatParams&) override {
    throw llm::TransportError("endpoint down", 4);
  }
  std::string name() const override { return "live"; }
};

}  // namespace

TEST_CASE("value oracle on the Titanic Age graph") {
  const auto age = testing::age_term();
  CHECK(oracle_value_at(age, 30.0) == 0.254);
  CHECK(oracle_value_at(age, 3.528) == 0.91);
  CHECK(oracle_value_at(age, 79.9) == -0.887);
  try {
    oracle_value_at(age, 81.0);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kOutOfDomain);
  }
}

TEST_CASE("monotonicity oracle") {
  CHECK(oracle_monotonicity(testing::age_term()) == MonotonicityClass::kNotMonotone);
  CHECK(oracle_monotonicity(steps({0, 1, 2, 3}, {1, 2, 3})) == MonotonicityClass::kIncreasing);
  CHECK(oracle_monotonicity(steps({0, 1, 2, 3}, {3, 3, 1})) == MonotonicityClass::kDecreasing);
  CHECK(oracle_monotonicity(steps({0, 1, 2, 3}, {2, 2, 2})) == MonotonicityClass::kConstant);
  CHECK(oracle_monotonicity(steps({0, 1}, {2})) == MonotonicityClass::kConstant);
  CHECK(oracle_monotonicity(steps({0, 1, 2, 3}, {1, 3, 2})) == MonotonicityClass::kNotMonotone);
  CHECK(monotonicity_from_string("not_monotone") == MonotonicityClass::kNotMonotone);
  CHECK_THROWS_AS(monotonicity_from_string("sideways"), Error);

  CHECK(near_monotonicity(steps({0, 1, 2, 3, 4}, {1, 2, 3, 2.5})) == doctest::Approx(2.0 / 3));
  CHECK(near_monotonicity(steps({0, 1}, {1})) == 1.0);
}

TEST_CASE("largest jump oracle") {
  const auto age = testing::age_term();
  const auto j = oracle_largest_jump(age);
  CHECK(j.boundary_x == 2.5);
  CHECK(j.index == 0);
  CHECK(text::round_to(j.delta, 3) == 1.147);
  CHECK(j.magnitude == std::fabs(j.delta));

  const auto simple = oracle_largest_jump(steps({0, 1, 2}, {0, 5}));
  CHECK(simple.boundary_x == 1);
  CHECK(simple.delta == 5);

  // Ties go to the leftmost boundary.
  CHECK(oracle_largest_jump(steps({0, 1, 2, 3}, {0, 1, 0})).boundary_x == 1);
  CHECK_THROWS_AS(oracle_largest_jump(steps({0, 1}, {1})), Error);
  CHECK_THROWS_AS(oracle_largest_jump(testing::sex_term()), Error);
}

TEST_CASE("oracles agree with brute-force recomputation") {
  Rng rng(99);
  for (int i = 0; i < 300; ++i) {
    testing::RandomTermOptions o;
    o.coarse_means = i % 2 == 0;
    const auto t = testing::random_term(rng, o);
    const auto brute = testing::brute_largest_jump(t);
    const auto jump = oracle_largest_jump(t);
    CHECK(jump.index == brute.index);
    CHECK(jump.boundary_x == brute.boundary_x);
    CHECK(jump.delta == brute.delta);
    CHECK(brute_name(oracle_monotonicity(t)) == testing::brute_monotonicity(t.means));
  }
}

TEST_CASE("y inversion") {
  const auto sex = testing::sex_term();
  const auto inv = perturb_invert_y(sex);
  CHECK(oracle_value_at(inv, std::string("female")) == -1.397);
  CHECK(perturb_invert_y(inv) == sex);

  Rng rng(4);
  for (int i = 0; i < 200; ++i) {
    testing::RandomTermOptions o;
    o.coarse_means = i % 3 == 0;
    const auto t = testing::random_term(rng, o);
    const auto u = perturb_invert_y(t);
    CHECK(perturb_invert_y(u) == t);
    CHECK(u.edges == t.edges);
    CHECK(u.weights == t.weights);
    for (std::size_t b = 0; b < u.bin_count(); ++b) {
      CHECK(u.lower_ci[b] <= u.means[b]);
      CHECK(u.means[b] <= u.upper_ci[b]);
    }
    const auto before = oracle_monotonicity(t);
    const auto after = oracle_monotonicity(u);
    if (before == MonotonicityClass::kIncreasing) CHECK(after == MonotonicityClass::kDecreasing);
    if (before == MonotonicityClass::kDecreasing) CHECK(after == MonotonicityClass::kIncreasing);
    if (before == MonotonicityClass::kConstant) CHECK(after == MonotonicityClass::kConstant);
    if (before == MonotonicityClass::kNotMonotone) CHECK(after == MonotonicityClass::kNotMonotone);
    const auto j = oracle_largest_jump(t);
    const auto k = oracle_largest_jump(u);
    CHECK(k.boundary_x == j.boundary_x);
    CHECK(k.delta == -j.delta);
    CHECK(k.magnitude == j.magnitude);
  }
}

TEST_CASE("category swap") {
  const auto sex = testing::sex_term();
  const auto swapped = perturb_swap_categories(sex, "male", "female");
  CHECK(oracle_value_at(swapped, std::string("male")) == 1.397);
  CHECK(oracle_value_at(swapped, std::string("female")) == -1.397);
  CHECK(swapped.labels == sex.labels);
  CHECK(perturb_swap_categories(swapped, "male", "female") == sex);
  CHECK(perturb_swap_categories(sex, "male", "male") == sex);
  CHECK_THROWS_AS(perturb_swap_categories(sex, "male", "other"), Error);
  CHECK_THROWS_AS(perturb_swap_categories(testing::age_term(), "a", "b"), Error);

  gam::GraphTerm three;
  three.feature_name = "c";
  three.kind = gam::FeatureKind::kCategorical;
  three.labels = {"a", "b", "c"};
  three.means = {1, 2, 3};
  three.lower_ci = {0, 1, 2};
  three.upper_ci = {2, 3, 4};
  three.weights = {10, 20, 30};
  const auto s = perturb_swap_categories(three, "a", "c");
  CHECK(s.means == std::vector<double>{3, 2, 1});
  CHECK(s.lower_ci == std::vector<double>{2, 1, 0});
  CHECK(s.weights == std::vector<double>{30, 20, 10});
}

TEST_CASE("model-level perturbations") {
  const auto m = testing::titanic_model();
  const auto inv = invert_model_term(m, "Sex");
  CHECK(inv.terms[0] == m.terms[0]);
  CHECK(inv.terms[1] == perturb_invert_y(m.terms[1]));
  CHECK(invert_model_term(inv, "Sex") == m);
  CHECK(swap_model_categories(swap_model_categories(m, "Sex", "male", "female"), "Sex", "male",
                              "female") == m);
  try {
    invert_model_term(m, "Fare");
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kNotFound);
  }
}

TEST_CASE("numeric answer parsing") {
  CHECK(parse_numeric_answer("The value at 3.528 is 0.91.") == 0.91);
  CHECK_FALSE(parse_numeric_answer("I cannot determine this.").has_value());
  CHECK(parse_numeric_answer("It lies in (3.5, 12.5) and equals 0.910") == 0.91);
  CHECK(parse_numeric_answer("The mean is \xE2\x88\x92" "0.887.") == -0.887);
  CHECK(parse_numeric_answer("The answer is -1.2e-3") == -0.0012);
  CHECK(parse_numeric_answer("Only the interval (3.5, 12.5)") == 12.5);
  CHECK(parse_numeric_answer("Value: .5") == 0.5);
  // Digits glued to words are not answers.
  CHECK(parse_numeric_answer("The value is 0.25 according to GPT4") == 0.25);
  CHECK(extract_numbers("from -0.308 to 0.839 at 2.5") == std::vector<double>{-0.308, 0.839, 2.5});
}

TEST_CASE("monotonicity answer parsing") {
  using M = MonotonicityClass;
  CHECK(parse_monotonicity_answer("the graph is monotone decreasing") == M::kDecreasing);
  CHECK(parse_monotonicity_answer("It is not monotone.") == M::kNotMonotone);
  CHECK(parse_monotonicity_answer("It is monotonically increasing") == M::kIncreasing);
  CHECK(parse_monotonicity_answer("non-decreasing overall") == M::kIncreasing);
  CHECK(parse_monotonicity_answer("The graph isn't monotonic") == M::kNotMonotone);
  CHECK(parse_monotonicity_answer("It is neither increasing nor decreasing") == M::kNotMonotone);
  CHECK(parse_monotonicity_answer("It first looks increasing, but overall it is not monotone") ==
        M::kNotMonotone);
  CHECK(parse_monotonicity_answer("Non-monotone.") == M::kNotMonotone);
  CHECK(parse_monotonicity_answer("The graph is constant.") == M::kConstant);
  CHECK_FALSE(parse_monotonicity_answer("unknown").has_value());
}

TEST_CASE("grading examples") {
  CHECK(grade_case(TaskKind::read_value(30.0), 0.254, "... is 0.254").correct);
  CHECK(grade_case(TaskKind::read_value(30.0), 0.254, "about 0.2544").correct);
  CHECK_FALSE(grade_case(TaskKind::read_value(30.0), 0.254, "about 0.2551").correct);
  const auto un = grade_case(TaskKind::read_value(30.0), 0.254, "no idea");
  CHECK_FALSE(un.correct);
  CHECK(un.unparseable);

  CHECK_FALSE(grade_case(TaskKind::monotonicity(), MonotonicityClass::kIncreasing,
                         "the graph is monotone decreasing")
                  .correct);
  for (const char* answer : {"increasing", "monotone decreasing", "constant"}) {
    CHECK(grade_case(TaskKind::monotonicity(), MonotonicityClass::kConstant, answer).correct);
  }
  CHECK_FALSE(
      grade_case(TaskKind::monotonicity(), MonotonicityClass::kConstant, "not monotone").correct);

  const auto truth = jump_truth(testing::age_term(), 3);
  CHECK(grade_case(TaskKind::largest_jump(), truth,
                   "largest jump at age 2.5, from -0.308 to 0.839")
            .correct);
  CHECK(grade_case(TaskKind::largest_jump(), truth,
                   "Between the intervals (2.0, 2.5) and (2.5, 3.5) the graph jumps.")
            .correct);
  CHECK(grade_case(TaskKind::largest_jump(), truth, "It goes from -0.308 up to 0.839.").correct);
  CHECK_FALSE(grade_case(TaskKind::largest_jump(), truth,
                         "The largest jump is at 43.0, from 0.086 to -0.93.")
                  .correct);
  CHECK(grade_case(TaskKind::largest_jump(), truth, "").unparseable);
}

TEST_CASE("jump truth keeps ties at the rendered precision") {
  const auto t = steps({0, 1, 2, 3}, {0, 1.0, 0.0004});
  const auto truth = jump_truth(t, 3);
  REQUIRE(truth.candidates.size() == 2);
  CHECK(truth.best().jump.boundary_x == 1);
  CHECK(grade_case(TaskKind::largest_jump(), truth, "The largest jump is at 2.").correct);
}

TEST_CASE("grader sanity on random graphs") {
  Rng rng(31);
  for (int i = 0; i < 300; ++i) {
    testing::RandomTermOptions o;
    o.coarse_means = i % 2 == 0;
    o.max_bins = 50;
    const auto raw = testing::random_term(rng, o);
    text::RenderOptions r;
    const auto t = text::round_term(raw, r);
    const std::vector<std::pair<TaskKind, Truth>> cases{
        {TaskKind::read_value(t.edges[1]), oracle_value_at(t, t.edges[1])},
        {TaskKind::monotonicity(), oracle_monotonicity(t)},
        {TaskKind::largest_jump(), jump_truth(t, 3)}};
    for (const auto& [task, truth] : cases) {
      CHECK(grade_case(task, truth, render_truth(truth)).correct);
      CHECK_FALSE(grade_case(task, truth, "").correct);
    }
  }
}

TEST_CASE("benchmark plan") {
  BenchmarkConfig cfg;
  cfg.seed = 3;
  const auto graphs = titanic_graphs();
  const auto cases = plan_benchmark(graphs, cfg);
  // ceil(75 / 2) value questions per graph, two monotonicity variants per
  // graph, one jump for the continuous graph.
  CHECK(read_value_samples(cfg, 2) == 38);
  CHECK(read_value_samples(cfg, 31) == 3);
  CHECK(cases.size() == 76 + 4 + 1);
  for (std::size_t i = 0; i < cases.size(); ++i) CHECK(cases[i].index == i);
  CHECK(cases.front().task.type == TaskType::kReadValue);
  CHECK(cases.back().task.type == TaskType::kLargestJump);
  CHECK(cases[76].variant == "original");
  CHECK(cases[77].variant == "inverted");
  CHECK(cases[77].graph_text.text.find("-0.839") != std::string::npos);

  for (const auto& c : cases) {
    if (c.task.type != TaskType::kReadValue) continue;
    if (const double* x = std::get_if<double>(&*c.task.point)) {
      CHECK(*x >= 2.0);
      CHECK(*x <= 80.0);
      CHECK(text::round_to(*x, 3) == *x);
      CHECK(std::find(c.shown_term.edges.begin() + 1, c.shown_term.edges.end() - 1, *x) ==
            c.shown_term.edges.end() - 1);
      CHECK(std::get<double>(c.truth) == testing::brute_value_at(c.shown_term, *x));
    } else {
      CHECK(c.graph_id == "titanic/Sex");
    }
  }

  const auto again = plan_benchmark(graphs, cfg);
  REQUIRE(again.size() == cases.size());
  for (std::size_t i = 0; i < cases.size(); ++i) CHECK(again[i].task == cases[i].task);
  cfg.seed = 4;
  const auto other = plan_benchmark(graphs, cfg);
  bool differs = false;
  for (std::size_t i = 0; i < 76; ++i) differs |= !(other[i].task == cases[i].task);
  CHECK(differs);

  cfg.tasks = {TaskType::kLargestJump, TaskType::kMonotonicity};
  const auto subset = plan_benchmark(graphs, cfg);
  CHECK(subset.size() == 5);
  CHECK(subset.front().task.type == TaskType::kMonotonicity);

  cfg.tasks = {TaskType::kDescribe};
  CHECK_THROWS_AS(plan_benchmark(graphs, cfg), Error);
  CHECK_THROWS_AS(plan_benchmark({}, BenchmarkConfig{}), Error);
}

TEST_CASE("oracle echo scores everything, adversarial scores nothing") {
  BenchmarkConfig cfg;
  const auto graphs = titanic_graphs();
  const auto cases = plan_benchmark(graphs, cfg);
  {
    llm::ChatClient client(std::make_shared<llm::ScriptedTransport>(
                               oracle_echo_responder(cases, GradeOptions{})),
                           llm::ChatParams{});
    const auto report = run_benchmark(graphs, client, cfg);
    CHECK(report.self_check_failures.empty());
    int total = 0;
    for (const auto& t : report.tallies) {
      CHECK(t.successes == t.total);
      total += t.total;
    }
    CHECK(total == static_cast<int>(report.verdicts.size()));
    CHECK(report.verdicts.size() == cases.size());
    // Two turns per jump case, one per other case.
    CHECK(client.transport_calls() == cases.size() + 1);
  }
  {
    llm::ChatClient client(std::make_shared<llm::ScriptedTransport>(adversarial_responder()),
                           llm::ChatParams{});
    const auto report = run_benchmark(graphs, client, cfg);
    for (const auto& t : report.tallies) CHECK(t.successes == 0);
  }
}

TEST_CASE("transport errors mark cases without stopping the run") {
  BenchmarkConfig cfg;
  cfg.read_value_samples_per_graph = 1;
  llm::ChatClient client(std::make_shared<FailingTransport>(), llm::ChatParams{});
  const auto report = run_benchmark(titanic_graphs(), client, cfg);
  CHECK(report.verdicts.size() == 2 + 4 + 1);
  for (const auto& v : report.verdicts) {
    CHECK_FALSE(v.correct);
    REQUIRE(v.error.has_value());
    CHECK(*v.error == "endpoint down");
    CHECK(v.attempts == 4);
  }
  CHECK(report.transport == "live");
}

TEST_CASE("parallel runs keep plan order and results") {
  BenchmarkConfig cfg;
  cfg.seed = 8;
  const auto graphs = titanic_graphs();
  const auto cases = plan_benchmark(graphs, cfg);
  auto run = [&](int concurrency) {
    cfg.concurrency = concurrency;
    llm::ChatClient client(
        std::make_shared<ConcurrentOracle>(oracle_echo_responder(cases, GradeOptions{})),
        llm::ChatParams{});
    return serialize_report(run_benchmark(graphs, client, cfg));
  };
  CHECK(run(4) == run(1));
}

TEST_CASE("report serialization") {
  BenchmarkConfig cfg;
  cfg.read_value_samples_per_graph = 2;
  const auto graphs = titanic_graphs();
  const auto cases = plan_benchmark(graphs, cfg);
  llm::ChatClient client(
      std::make_shared<llm::ScriptedTransport>(oracle_echo_responder(cases, GradeOptions{})),
      llm::ChatParams{});
  const auto report = run_benchmark(graphs, client, cfg);
  const auto text = serialize_report(report);
  CHECK(text.find("\"version\": \"gamtalk-report/1\"") != std::string::npos);
  CHECK(serialize_report(report_from_json(nlohmann::json::parse(text))) == text);

  const auto table = render_report_table(report);
  CHECK(table.find("Reading a Value from a Graph") != std::string::npos);
  CHECK(table.find("Deciding Monotonicity") != std::string::npos);
  CHECK(table.find("Finding the Largest Jump") != std::string::npos);
  CHECK(task_label(TaskType::kLargestJump) == "Finding the Largest Jump");

  for (const Truth& t : {Truth{0.25}, Truth{MonotonicityClass::kConstant},
                         Truth{jump_truth(testing::age_term(), 3)}}) {
    CHECK(truth_from_json(truth_to_json(t)) == t);
  }
}
