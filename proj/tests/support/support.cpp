#include "support.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>

#include "gamtalk/error.hpp"
#include "gamtalk/gam/model_io.hpp"

namespace gamtalk::testing {

std::filesystem::path data_dir() { return GAMTALK_TEST_DATA_DIR; }

gam::GamModel titanic_model() {
  return gam::load_model(data_dir() / "fixtures" / "titanic_fixture.json");
}

gam::GraphTerm age_term() { return *titanic_model().find_term("Age"); }

gam::GraphTerm sex_term() { return *titanic_model().find_term("Sex"); }

namespace {

double grid_value(Rng& rng, bool coarse) {
  if (coarse) return static_cast<double>(static_cast<int>(rng.index(9)) - 4) * 0.25;
  return std::round(rng.uniform(-3.0, 3.0) * 1e4) / 1e4;
}

void fill_ci(Rng& rng, gam::GraphTerm& t) {
  for (double m : t.means) {
    t.lower_ci.push_back(m - std::round(rng.uniform(0.0, 1.0) * 1e4) / 1e4);
    t.upper_ci.push_back(m + std::round(rng.uniform(0.0, 1.0) * 1e4) / 1e4);
    t.weights.push_back(static_cast<double>(1 + rng.index(50)));
  }
}

std::vector<double> random_edges(Rng& rng, std::size_t bins) {
  std::vector<double> edges;
  long cents = static_cast<long>(rng.index(2001)) - 1000;
  edges.push_back(static_cast<double>(cents) / 100.0);
  for (std::size_t i = 0; i < bins; ++i) {
    cents += 1 + static_cast<long>(rng.index(300));
    edges.push_back(static_cast<double>(cents) / 100.0);
  }
  return edges;
}

}  // namespace

gam::GraphTerm random_term(Rng& rng, const RandomTermOptions& opts) {
  gam::GraphTerm t;
  const std::size_t bins = opts.min_bins + rng.index(opts.max_bins - opts.min_bins + 1);
  std::uint64_t kind = opts.continuous_only ? 0 : rng.index(3);
  t.feature_name = "f" + std::to_string(rng.index(1000));
  if (kind == 2 && bins != 2) kind = 1;
  if (kind == 0) {
    t.kind = gam::FeatureKind::kContinuous;
    t.edges = random_edges(rng, bins);
  } else {
    t.kind = kind == 1 ? gam::FeatureKind::kCategorical : gam::FeatureKind::kBoolean;
    for (std::size_t i = 0; i < bins; ++i) t.labels.push_back("c" + std::to_string(i));
  }
  for (std::size_t i = 0; i < bins; ++i) t.means.push_back(grid_value(rng, opts.coarse_means));
  fill_ci(rng, t);
  return t;
}

gam::GraphTerm random_monotone_term(Rng& rng, std::size_t bins, bool decreasing) {
  gam::GraphTerm t;
  t.feature_name = "mono";
  t.edges = random_edges(rng, bins);
  double level = std::round(rng.uniform(-2.0, 2.0) * 1e3) / 1e3;
  for (std::size_t i = 0; i < bins; ++i) {
    // Flat steps are kept on purpose.
    if (rng.index(4) != 0) level += std::round(rng.uniform(0.0, 0.5) * 1e3) / 1e3;
    t.means.push_back(decreasing ? -level : level);
  }
  fill_ci(rng, t);
  return t;
}

BruteJump brute_largest_jump(const gam::GraphTerm& term) {
  if (!term.is_continuous() || term.bin_count() < 2) {
    throw Error(ErrorCode::kInvalidArgument, "no interior boundary");
  }
  std::vector<BruteJump> all;
  for (std::size_t i = 0; i + 1 < term.bin_count(); ++i) {
    all.push_back({i, term.edges[i + 1], term.means[i + 1] - term.means[i]});
  }
  // Biggest magnitude first; among equals, the smaller boundary.
  std::stable_sort(all.begin(), all.end(), [](const BruteJump& a, const BruteJump& b) {
    if (std::fabs(a.delta) != std::fabs(b.delta)) return std::fabs(a.delta) > std::fabs(b.delta);
    return a.boundary_x < b.boundary_x;
  });
  return all.front();
}

std::string brute_monotonicity(const std::vector<double>& means) {
  if (std::adjacent_find(means.begin(), means.end(), std::not_equal_to<>()) == means.end()) {
    return "constant";
  }
  if (std::is_sorted(means.begin(), means.end())) return "increasing";
  if (std::is_sorted(means.begin(), means.end(), std::greater<>())) return "decreasing";
  return "not_monotone";
}

double brute_value_at(const gam::GraphTerm& term, double x) {
  const std::size_t n = term.bin_count();
  for (std::size_t i = 0; i < n; ++i) {
    const bool last = i + 1 == n;
    if (term.edges[i] <= x && (x < term.edges[i + 1] || (last && x == term.edges[i + 1]))) {
      return term.means[i];
    }
  }
  throw Error(ErrorCode::kOutOfDomain, "outside the axis");
}

TempDir::TempDir(const std::string& tag) {
  static int counter = 0;
  Rng rng(static_cast<std::uint64_t>(std::hash<std::string>{}(tag)) ^
          static_cast<std::uint64_t>(std::chrono::steady_clock::now().time_since_epoch().count()));
  path_ = std::filesystem::temp_directory_path() /
          ("gamtalk-" + tag + "-" + std::to_string(rng.next() % 1000000000) + "-" +
           std::to_string(++counter));
  std::filesystem::remove_all(path_);
  std::filesystem::create_directories(path_);
}

TempDir::~TempDir() {
  std::error_code ec;
  std::filesystem::remove_all(path_, ec);
}

}  // namespace gamtalk::testing
