#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "gamtalk/gam/types.hpp"
#include "gamtalk/random.hpp"

namespace gamtalk::testing {

// Source-tree data/ directory.
std::filesystem::path data_dir();

// The Titanic model of the fixture file and its two graphs.
gam::GamModel titanic_model();
gam::GraphTerm age_term();
gam::GraphTerm sex_term();

struct RandomTermOptions {
  std::size_t min_bins = 2;
  std::size_t max_bins = 200;
  // Draw means from a coarse grid so that ties and flat runs are common.
  bool coarse_means = false;
  // Continuous when false is never chosen; otherwise a mix of kinds.
  bool continuous_only = true;
};

// Valid random term. Edges sit on a 0.01 grid and every bin is at least 0.01
// wide, so rounding to three decimals keeps the axis intact.
gam::GraphTerm random_term(Rng& rng, const RandomTermOptions& opts = {});

// Continuous term whose means are non-decreasing, or non-increasing when
// `decreasing` is set.
gam::GraphTerm random_monotone_term(Rng& rng, std::size_t bins, bool decreasing);

// Exhaustive recomputations used as independent references.
struct BruteJump {
  std::size_t index;
  double boundary_x;
  double delta;
};
BruteJump brute_largest_jump(const gam::GraphTerm& term);

// "increasing", "decreasing", "constant" or "not_monotone".
std::string brute_monotonicity(const std::vector<double>& means);

// Linear scan over bins for the bin that holds x.
double brute_value_at(const gam::GraphTerm& term, double x);

// Fresh empty directory under the system temp path, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag);
  ~TempDir();
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

}  // namespace gamtalk::testing
