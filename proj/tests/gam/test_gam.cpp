#include <doctest.h>

#include <cmath>
#include <functional>
#include <numeric>

#include "gamtalk/error.hpp"
#include "gamtalk/gam/model.hpp"
#include "gamtalk/gam/model_io.hpp"
#include "gamtalk/gam/trainer.hpp"
#include "support.hpp"

using namespace gamtalk;
using gamtalk::testing::age_term;
using gamtalk::testing::sex_term;

namespace {

gam::GraphTerm step_term(std::vector<double> edges, std::vector<double> means,
                         std::string name = "x") {
  gam::GraphTerm t;
  t.feature_name = std::move(name);
  t.edges = std::move(edges);
  t.means = means;
  t.lower_ci = means;
  t.upper_ci = means;
  t.weights.assign(means.size(), 1.0);
  return t;
}

gam::Table numeric_table(std::vector<std::vector<double>> cols, std::vector<double> y) {
  gam::Table t;
  for (std::size_t i = 0; i < cols.size(); ++i) {
    t.features.push_back({"x" + std::to_string(i + 1), std::move(cols[i])});
  }
  t.target_name = "y";
  t.target = std::move(y);
  return t;
}

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an error");
  return ErrorCode::kIo;
}

}  // namespace

TEST_CASE("term_value_at reads the Titanic Age graph") {
  const auto age = age_term();
  CHECK(gam::term_value_at(age, 30.0) == 0.254);
  CHECK(gam::term_value_at(age, 3.528) == 0.91);
  // Shared edge belongs to the bin on its right.
  CHECK(gam::term_value_at(age, 2.5) == 0.839);
  // The last bin is closed on the right.
  CHECK(gam::term_value_at(age, 80.0) == -0.887);
  CHECK(gam::term_value_at(age, 2.0) == -0.308);
  CHECK(code_of([&] { gam::term_value_at(age, 81.0); }) == ErrorCode::kOutOfDomain);
  CHECK(code_of([&] { gam::term_value_at(age, 1.999); }) == ErrorCode::kOutOfDomain);
}

TEST_CASE("term_value_at on categorical terms") {
  const auto sex = sex_term();
  CHECK(gam::term_value_at(sex, std::string("female")) == 1.397);
  CHECK(gam::term_value_at(sex, std::string("male")) == -1.397);
  CHECK(code_of([&] { gam::term_value_at(sex, std::string("other")); }) ==
        ErrorCode::kOutOfDomain);
  CHECK_THROWS_AS(gam::term_value_at(sex, 1.0), Error);
}

TEST_CASE("bins partition the axis under the half-open convention") {
  Rng rng(11);
  for (int trial = 0; trial < 200; ++trial) {
    const auto t = testing::random_term(rng, {2, 40});
    for (int k = 0; k < 50; ++k) {
      const double x = rng.uniform(t.domain_min(), t.domain_max());
      CHECK(gam::term_value_at(t, x) == testing::brute_value_at(t, x));
    }
    for (double e : t.edges) CHECK(gam::term_value_at(t, e) == testing::brute_value_at(t, e));
  }
}

TEST_CASE("predict is intercept plus the term contributions") {
  gam::GamModel m;
  m.intercept = 0.1;
  m.terms = {step_term({0, 1, 2}, {0.839, 0.0}, "a"), step_term({0, 1}, {-0.3}, "b")};
  m.importances = {0.4, 0.3};
  const auto p = gam::predict(m, {{"a", 0.5}, {"b", 0.5}});
  CHECK(p.score == doctest::Approx(0.639).epsilon(1e-12));
  CHECK_FALSE(p.out_of_range);

  SUBCASE("zeroed terms give the intercept") {
    for (auto& t : m.terms) std::fill(t.means.begin(), t.means.end(), 0.0);
    for (auto& t : m.terms) t.lower_ci = t.upper_ci = t.means;
    CHECK(gam::predict(m, {{"a", 1.7}, {"b", 0.2}}).score == 0.1);
  }
  SUBCASE("out-of-range values clamp and are flagged") {
    const auto q = gam::predict(m, {{"a", 5.0}, {"b", -1.0}});
    CHECK(q.out_of_range);
    CHECK(q.score == doctest::Approx(0.1 + 0.0 - 0.3));
  }
  SUBCASE("missing feature") {
    CHECK(code_of([&] { gam::predict(m, {{"a", 0.5}}); }) == ErrorCode::kInvalidArgument);
  }
}

TEST_CASE("additivity holds exactly on random rows") {
  auto model = testing::titanic_model();
  Rng rng(5);
  for (int i = 0; i < 50; ++i) {
    const double age = rng.uniform(2.0, 80.0);
    const std::string sex = rng.index(2) ? "male" : "female";
    const auto p = gam::predict(model, {{"Age", age}, {"Sex", sex}});
    const double sum = model.intercept + gam::term_value_at(model.terms[0], age) +
                       gam::term_value_at(model.terms[1], sex);
    CHECK(p.score == sum);
  }
}

TEST_CASE("global importances are mean absolute contributions") {
  gam::GamModel m;
  m.terms = {step_term({0, 1, 2}, {1.0, -1.0}, "x1"), step_term({0, 1, 2}, {0.0, 0.0}, "x2")};
  m.importances = {0, 0};
  const auto table = numeric_table({{0.5, 1.5, 0.2, 1.9}, {0.1, 0.2, 0.3, 0.4}}, {0, 0, 0, 0});
  const auto imp = gam::global_importances(m, table);
  REQUIRE(imp.size() == 2);
  CHECK(imp[0] == 1.0);
  CHECK(imp[1] == 0.0);

  gam::Table missing;
  missing.features = {table.features[0]};
  missing.target = table.target;
  CHECK_THROWS_AS(gam::global_importances(m, missing), Error);
}

TEST_CASE("weighted importance of the Age graph matches direct summation") {
  auto age = age_term();
  Rng rng(3);
  for (auto& w : age.weights) w = static_cast<double>(1 + rng.index(40));
  double num = 0, den = 0;
  for (std::size_t i = 0; i < age.bin_count(); ++i) {
    num += age.weights[i] * std::fabs(age.means[i]);
    den += age.weights[i];
  }
  CHECK(gam::weighted_importance(age) == doctest::Approx(num / den).epsilon(1e-12));
}

TEST_CASE("term validation") {
  auto t = step_term({0, 1, 2}, {0.1, 0.2});
  CHECK_NOTHROW(t.validate());
  auto bad = t;
  bad.edges = {0, 2, 1};
  CHECK_THROWS_AS(bad.validate(), Error);
  bad = t;
  bad.lower_ci[0] = 0.5;
  CHECK_THROWS_AS(bad.validate(), Error);
  bad = t;
  bad.weights[1] = -1;
  CHECK_THROWS_AS(bad.validate(), Error);
  bad = t;
  bad.means.push_back(0.0);
  CHECK_THROWS_AS(bad.validate(), Error);

  auto cat = sex_term();
  CHECK_NOTHROW(cat.validate());
  cat.labels = {"a", "a"};
  CHECK_THROWS_AS(cat.validate(), Error);
  cat.labels = {"a", ""};
  CHECK_THROWS_AS(cat.validate(), Error);
  auto boolean = sex_term();
  boolean.kind = gam::FeatureKind::kBoolean;
  CHECK_NOTHROW(boolean.validate());
  boolean.labels.push_back("x");
  boolean.means.push_back(0);
  boolean.lower_ci.push_back(0);
  boolean.upper_ci.push_back(0);
  boolean.weights.push_back(1);
  CHECK_THROWS_AS(boolean.validate(), Error);
}

TEST_CASE("fit config validation") {
  gam::FitConfig c;
  CHECK_NOTHROW(c.validate());
  c.max_bins = 1;
  CHECK_THROWS_AS(c.validate(), Error);
  c = {};
  c.outer_bags = 0;
  CHECK_THROWS_AS(c.validate(), Error);
  c = {};
  c.learning_rate = 0;
  CHECK_THROWS_AS(c.validate(), Error);
  c = {};
  c.boosting_rounds = 0;
  CHECK_THROWS_AS(c.validate(), Error);
}

TEST_CASE("quantile edges") {
  const std::vector<double> few{3, 1, 2, 2, 1};
  CHECK(gam::quantile_edges(few, 64) == std::vector<double>{1, 1.5, 2.5, 3});
  const std::vector<double> constant(10, 4.0);
  CHECK(gam::quantile_edges(constant, 64) == std::vector<double>{3.5, 4.5});
  std::vector<double> many(1000);
  std::iota(many.begin(), many.end(), 0.0);
  const auto edges = gam::quantile_edges(many, 10);
  CHECK(edges.size() == 11);
  CHECK(edges.front() == 0.0);
  CHECK(edges.back() == 999.0);
  CHECK(std::is_sorted(edges.begin(), edges.end()));
  CHECK(std::adjacent_find(edges.begin(), edges.end()) == edges.end());
}

TEST_CASE("fit_gam on a constant target") {
  Rng rng(1);
  std::vector<double> x1(200), x2(200);
  for (auto& v : x1) v = rng.uniform(-1, 1);
  for (auto& v : x2) v = rng.uniform(0, 5);
  const auto m = gam::fit_gam(numeric_table({x1, x2}, std::vector<double>(200, 3.0)), {});
  CHECK(m.link == gam::Link::kIdentity);
  CHECK(std::fabs(m.intercept - 3.0) <= 1e-9);
  for (const auto& t : m.terms) {
    for (double v : t.means) CHECK(std::fabs(v) <= 1e-9);
  }
}

TEST_CASE("fit_gam recovers closed-form log-odds of a binary feature") {
  gam::Table t;
  std::vector<std::string> labels;
  for (int i = 0; i < 500; ++i) {
    labels.push_back("a");
    t.target.push_back(i % 5 != 0 ? 1.0 : 0.0);  // P(y=1|a) = 0.8
  }
  for (int i = 0; i < 500; ++i) {
    labels.push_back("b");
    t.target.push_back(i % 5 == 0 ? 1.0 : 0.0);  // P(y=1|b) = 0.2
  }
  t.features.push_back({"g", labels});
  t.target_name = "y";
  const auto m = gam::fit_gam(t, {});
  CHECK(m.link == gam::Link::kLogit);
  const auto& term = m.terms.front();
  CHECK(term.labels == std::vector<std::string>{"a", "b"});
  const double a = gam::term_value_at(term, std::string("a"));
  const double b = gam::term_value_at(term, std::string("b"));
  const double expected = std::log(0.8 / 0.2) - std::log(0.2 / 0.8);
  CHECK(std::fabs((a - b) - expected) <= 0.2);
}

TEST_CASE("fit_gam invariants: centering, CI sanity, determinism") {
  Rng rng(9);
  const std::size_t n = 600;
  std::vector<double> x1(n), x2(n), y(n);
  std::vector<std::string> c(n);
  for (std::size_t i = 0; i < n; ++i) {
    x1[i] = rng.uniform(-2, 2);
    x2[i] = rng.uniform(0, 1);
    c[i] = std::string(1, static_cast<char>('p' + rng.index(3)));
    y[i] = x1[i] * x1[i] + (c[i] == "q" ? 1.0 : 0.0) + 0.1 * rng.normal();
  }
  auto table = numeric_table({x1, x2}, y);
  table.features.push_back({"c", c});
  gam::FitConfig cfg;
  cfg.outer_bags = 4;
  cfg.random_seed = 17;
  const auto m1 = gam::fit_gam(table, cfg);
  const auto m2 = gam::fit_gam(table, cfg);
  CHECK(gam::serialize_model(m1) == gam::serialize_model(m2));
  CHECK(m1.importances.size() == m1.terms.size());
  for (const auto& t : m1.terms) {
    double num = 0, den = 0;
    for (std::size_t i = 0; i < t.bin_count(); ++i) {
      num += t.weights[i] * t.means[i];
      den += t.weights[i];
      CHECK(t.lower_ci[i] <= t.means[i]);
      CHECK(t.means[i] <= t.upper_ci[i]);
    }
    CHECK(std::fabs(num) / den <= 1e-9);
  }
  cfg.random_seed = 18;
  CHECK(gam::serialize_model(gam::fit_gam(table, cfg)) != gam::serialize_model(m1));
}

TEST_CASE("fit_gam errors") {
  CHECK_THROWS_AS(gam::fit_gam(numeric_table({}, std::vector<double>(30, 1.0)), {}), Error);
  CHECK_THROWS_AS(gam::fit_gam(numeric_table({std::vector<double>(10, 1.0)},
                                             std::vector<double>(10, 1.0)),
                               {}),
                  Error);
  gam::FitConfig logit;
  logit.link = gam::Link::kLogit;
  std::vector<double> x(40), y(40);
  for (int i = 0; i < 40; ++i) {
    x[i] = i;
    y[i] = i * 0.5;
  }
  CHECK_THROWS_AS(gam::fit_gam(numeric_table({x}, y), logit), Error);
}

TEST_CASE("a constant feature column yields one zero bin") {
  std::vector<double> x(100), k(100, 7.0), y(100);
  for (int i = 0; i < 100; ++i) {
    x[i] = i;
    y[i] = 0.01 * i;
  }
  const auto m = gam::fit_gam(numeric_table({x, k}, y), {});
  const auto& t = m.terms[1];
  REQUIRE(t.bin_count() == 1);
  CHECK(t.means[0] == 0.0);
}

TEST_CASE("model file round trip") {
  const auto m = testing::titanic_model();
  const auto text = gam::serialize_model(m);
  CHECK(text.find("\"version\": \"gamtalk-model/1\"") != std::string::npos);
  CHECK(gam::parse_model(text) == m);
  CHECK(gam::serialize_model(gam::parse_model(text)) == text);

  testing::TempDir dir("model-io");
  gam::save_model(m, dir / "m.json");
  CHECK(gam::load_model(dir / "m.json") == m);
  CHECK_THROWS_AS(gam::load_model(dir / "missing.json"), Error);
  CHECK_THROWS_AS(gam::parse_model("{\"version\": \"other/1\"}"), Error);
  CHECK_THROWS_AS(gam::parse_model("not json"), Error);
}
