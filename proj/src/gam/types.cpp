#include "gamtalk/gam/types.hpp"

#include <cmath>
#include <set>

#include "gamtalk/error.hpp"

namespace gamtalk::gam {
namespace {

[[noreturn]] void invalid(const std::string& message) {
  throw Error(ErrorCode::kInvalidArgument, message);
}

}  // namespace

std::string_view to_string(FeatureKind kind) {
  switch (kind) {
    case FeatureKind::kContinuous:
      return "continuous";
    case FeatureKind::kCategorical:
      return "categorical";
    case FeatureKind::kBoolean:
      return "boolean";
  }
  return "continuous";
}

FeatureKind feature_kind_from_string(std::string_view text) {
  if (text == "continuous") return FeatureKind::kContinuous;
  if (text == "categorical") return FeatureKind::kCategorical;
  if (text == "boolean") return FeatureKind::kBoolean;
  throw Error(ErrorCode::kParse,
              "unknown feature type '" + std::string(text) + "'");
}

std::string_view to_string(Link link) {
  return link == Link::kLogit ? "logit" : "identity";
}

Link link_from_string(std::string_view text) {
  if (text == "identity") return Link::kIdentity;
  if (text == "logit") return Link::kLogit;
  throw Error(ErrorCode::kParse, "unknown link '" + std::string(text) + "'");
}

void GraphTerm::validate() const {
  const std::string where = "term '" + feature_name + "': ";
  if (feature_name.empty()) invalid("term has an empty feature name");
  if (feature_name.find('\n') != std::string::npos) {
    invalid(where + "feature name contains a newline");
  }
  const std::size_t n = means.size();
  if (n == 0) invalid(where + "bin count must be at least 1");
  if (lower_ci.size() != n || upper_ci.size() != n || weights.size() != n) {
    invalid(where + "means, CI bounds and weights must have equal length");
  }
  if (is_continuous()) {
    if (!labels.empty()) invalid(where + "continuous term carries labels");
    if (edges.size() != n + 1) invalid(where + "expected bin_count + 1 edges");
    for (std::size_t i = 0; i + 1 < edges.size(); ++i) {
      if (!(edges[i] < edges[i + 1])) {
        invalid(where + "edges must be strictly increasing");
      }
    }
    for (double e : edges) {
      if (!std::isfinite(e)) invalid(where + "edges must be finite");
    }
  } else {
    if (!edges.empty()) invalid(where + "categorical term carries edges");
    if (labels.size() != n) invalid(where + "expected one label per bin");
    std::set<std::string_view> seen;
    for (const auto& label : labels) {
      if (label.empty()) invalid(where + "empty category label");
      if (!seen.insert(label).second) {
        invalid(where + "duplicate category label '" + label + "'");
      }
    }
    if (kind == FeatureKind::kBoolean && n != 2) {
      invalid(where + "boolean term must have exactly two categories");
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (!std::isfinite(means[i]) || !std::isfinite(lower_ci[i]) ||
        !std::isfinite(upper_ci[i])) {
      invalid(where + "non-finite value in bin " + std::to_string(i));
    }
    if (!(lower_ci[i] <= means[i] && means[i] <= upper_ci[i])) {
      invalid(where + "lower_ci <= mean <= upper_ci violated in bin " +
              std::to_string(i));
    }
    if (!(weights[i] >= 0.0)) {
      invalid(where + "negative weight in bin " + std::to_string(i));
    }
  }
}

std::optional<std::size_t> GraphTerm::find_label(std::string_view label) const {
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] == label) return i;
  }
  return std::nullopt;
}

void GamModel::validate() const {
  if (!std::isfinite(intercept)) invalid("model intercept is not finite");
  if (importances.size() != terms.size()) {
    invalid("model needs one importance per term");
  }
  std::set<std::string_view> names;
  for (const auto& term : terms) {
    term.validate();
    if (!names.insert(term.feature_name).second) {
      invalid("duplicate feature name '" + term.feature_name + "'");
    }
  }
  for (double importance : importances) {
    if (!(importance >= 0.0)) invalid("importances must be non-negative");
  }
}

const GraphTerm* GamModel::find_term(std::string_view feature_name) const {
  for (const auto& term : terms) {
    if (term.feature_name == feature_name) return &term;
  }
  return nullptr;
}

GraphTerm* GamModel::find_term(std::string_view feature_name) {
  for (auto& term : terms) {
    if (term.feature_name == feature_name) return &term;
  }
  return nullptr;
}

void FitConfig::validate() const {
  if (max_bins < 2) invalid("max_bins must be >= 2");
  if (outer_bags < 1) invalid("outer_bags must be >= 1");
  if (!(learning_rate > 0.0)) invalid("learning_rate must be > 0");
  if (boosting_rounds < 1) invalid("boosting_rounds must be >= 1");
  if (early_stopping_rounds < 1) invalid("early_stopping_rounds must be >= 1");
  if (!(validation_fraction > 0.0 && validation_fraction < 1.0)) {
    invalid("validation_fraction must lie in (0, 1)");
  }
  if (max_leaves < 2) invalid("max_leaves must be >= 2");
}

}  // namespace gamtalk::gam
