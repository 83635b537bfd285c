#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace gamtalk::gam {

// A boolean feature is a categorical feature with exactly two labels.
enum class FeatureKind { kContinuous, kCategorical, kBoolean };

enum class Link { kIdentity, kLogit };

std::string_view to_string(FeatureKind kind);
FeatureKind feature_kind_from_string(std::string_view text);
std::string_view to_string(Link link);
Link link_from_string(std::string_view text);

// A feature value handed to a term: numbers for continuous terms, labels for
// categorical ones.
using FeatureValue = std::variant<double, std::string>;

// One feature's shape function. Continuous terms own `edges` (bin_count + 1
// strictly increasing values); categorical and boolean terms own `labels`.
// Bin i of a continuous term covers [edges[i], edges[i+1]), the last bin also
// includes its upper edge.
struct GraphTerm {
  std::string feature_name;
  FeatureKind kind = FeatureKind::kContinuous;
  std::vector<double> edges;
  std::vector<std::string> labels;
  std::vector<double> means;
  std::vector<double> lower_ci;
  std::vector<double> upper_ci;
  std::vector<double> weights;

  bool is_continuous() const { return kind == FeatureKind::kContinuous; }
  std::size_t bin_count() const { return means.size(); }

  // Throws Error(kInvalidArgument) describing the first violated invariant.
  void validate() const;

  // Lower/upper edge of the continuous domain.
  double domain_min() const { return edges.front(); }
  double domain_max() const { return edges.back(); }

  std::optional<std::size_t> find_label(std::string_view label) const;

  bool operator==(const GraphTerm&) const = default;
};

struct GamModel {
  double intercept = 0.0;
  Link link = Link::kIdentity;
  std::vector<GraphTerm> terms;
  std::vector<double> importances;
  std::string target_description;

  void validate() const;
  const GraphTerm* find_term(std::string_view feature_name) const;
  GraphTerm* find_term(std::string_view feature_name);

  bool operator==(const GamModel&) const = default;
};

struct FitConfig {
  int max_bins = 64;
  int outer_bags = 8;
  double learning_rate = 0.1;
  int boosting_rounds = 2000;
  int early_stopping_rounds = 50;
  // Minimum drop of the mean validation loss that counts as progress.
  double early_stopping_tolerance = 1e-5;
  double validation_fraction = 0.15;
  int max_leaves = 3;
  std::uint64_t random_seed = 42;
  // Unset means: logit for a 0/1 target, identity otherwise.
  std::optional<Link> link;

  void validate() const;
};

}  // namespace gamtalk::gam
