#include "gamtalk/eval/oracles.hpp"

#include <cmath>
#include <utility>

#include "gamtalk/error.hpp"
#include "gamtalk/gam/model.hpp"

namespace gamtalk::eval {
namespace {

const gam::GraphTerm& require_term(const gam::GamModel& model,
                                   std::string_view feature) {
  const gam::GraphTerm* term = model.find_term(feature);
  if (term == nullptr) {
    throw Error(ErrorCode::kNotFound,
                "model has no feature '" + std::string(feature) + "'");
  }
  return *term;
}

}  // namespace

std::string_view to_string(MonotonicityClass cls) {
  switch (cls) {
    case MonotonicityClass::kIncreasing:
      return "increasing";
    case MonotonicityClass::kDecreasing:
      return "decreasing";
    case MonotonicityClass::kConstant:
      return "constant";
    case MonotonicityClass::kNotMonotone:
      return "not_monotone";
  }
  return "not_monotone";
}

MonotonicityClass monotonicity_from_string(std::string_view text) {
  for (auto cls : {MonotonicityClass::kIncreasing, MonotonicityClass::kDecreasing,
                   MonotonicityClass::kConstant, MonotonicityClass::kNotMonotone}) {
    if (to_string(cls) == text) return cls;
  }
  throw Error(ErrorCode::kParse,
              "unknown monotonicity class '" + std::string(text) + "'");
}

double oracle_value_at(const gam::GraphTerm& term, const gam::FeatureValue& x) {
  return gam::term_value_at(term, x);
}

MonotonicityClass oracle_monotonicity(const gam::GraphTerm& term) {
  bool up = true;
  bool down = true;
  for (std::size_t i = 1; i < term.means.size(); ++i) {
    if (term.means[i] < term.means[i - 1]) up = false;
    if (term.means[i] > term.means[i - 1]) down = false;
  }
  if (up && down) return MonotonicityClass::kConstant;
  if (up) return MonotonicityClass::kIncreasing;
  if (down) return MonotonicityClass::kDecreasing;
  return MonotonicityClass::kNotMonotone;
}

double near_monotonicity(const gam::GraphTerm& term) {
  const std::size_t pairs = term.means.size() < 2 ? 0 : term.means.size() - 1;
  if (pairs == 0) return 1.0;
  std::size_t up = 0;
  std::size_t down = 0;
  for (std::size_t i = 1; i < term.means.size(); ++i) {
    if (term.means[i] >= term.means[i - 1]) ++up;
    if (term.means[i] <= term.means[i - 1]) ++down;
  }
  return static_cast<double>(std::max(up, down)) / static_cast<double>(pairs);
}

JumpResult oracle_largest_jump(const gam::GraphTerm& term) {
  if (!term.is_continuous()) {
    throw Error(ErrorCode::kInvalidArgument,
                "largest jump is undefined for the unordered axis of '" +
                    term.feature_name + "'");
  }
  if (term.means.size() < 2) {
    throw Error(ErrorCode::kInvalidArgument,
                "largest jump needs at least two bins, '" + term.feature_name +
                    "' has one");
  }
  JumpResult best;
  best.magnitude = -1.0;
  for (std::size_t i = 0; i + 1 < term.means.size(); ++i) {
    const double delta = term.means[i + 1] - term.means[i];
    if (std::abs(delta) > best.magnitude) {
      best = {i, term.edges[i + 1], delta, std::abs(delta)};
    }
  }
  return best;
}

gam::GraphTerm perturb_invert_y(const gam::GraphTerm& term) {
  gam::GraphTerm out = term;
  for (std::size_t i = 0; i < term.means.size(); ++i) {
    out.means[i] = -term.means[i];
    out.lower_ci[i] = -term.upper_ci[i];
    out.upper_ci[i] = -term.lower_ci[i];
  }
  return out;
}

gam::GraphTerm perturb_swap_categories(const gam::GraphTerm& term,
                                       std::string_view a, std::string_view b) {
  if (term.is_continuous()) {
    throw Error(ErrorCode::kInvalidArgument,
                "feature '" + term.feature_name + "' has no categories to swap");
  }
  const auto ia = term.find_label(a);
  const auto ib = term.find_label(b);
  for (const auto& [label, idx] : {std::pair{a, ia}, std::pair{b, ib}}) {
    if (!idx) {
      throw Error(ErrorCode::kNotFound, "feature '" + term.feature_name +
                                            "' has no category '" +
                                            std::string(label) + "'");
    }
  }
  gam::GraphTerm out = term;
  std::swap(out.means[*ia], out.means[*ib]);
  std::swap(out.lower_ci[*ia], out.lower_ci[*ib]);
  std::swap(out.upper_ci[*ia], out.upper_ci[*ib]);
  std::swap(out.weights[*ia], out.weights[*ib]);
  return out;
}

gam::GamModel invert_model_term(const gam::GamModel& model,
                                std::string_view feature) {
  gam::GamModel out = model;
  *out.find_term(feature) = perturb_invert_y(require_term(model, feature));
  return out;
}

gam::GamModel swap_model_categories(const gam::GamModel& model,
                                    std::string_view feature,
                                    std::string_view a, std::string_view b) {
  gam::GamModel out = model;
  *out.find_term(feature) =
      perturb_swap_categories(require_term(model, feature), a, b);
  return out;
}

}  // namespace gamtalk::eval
