#pragma once

#include <cstddef>
#include <string>
#include <string_view>

#include "gamtalk/gam/types.hpp"

namespace gamtalk::eval {

enum class MonotonicityClass { kIncreasing, kDecreasing, kConstant, kNotMonotone };

std::string_view to_string(MonotonicityClass cls);
MonotonicityClass monotonicity_from_string(std::string_view text);

struct JumpResult {
  // Boundary between bins `index` and `index + 1`.
  std::size_t index = 0;
  double boundary_x = 0.0;
  // means[index + 1] - means[index].
  double delta = 0.0;
  double magnitude = 0.0;

  bool operator==(const JumpResult&) const = default;
};

// Graph value at x, with the bin convention of gam::term_value_at.
double oracle_value_at(const gam::GraphTerm& term, const gam::FeatureValue& x);

// Non-strict comparison over consecutive bin means.
MonotonicityClass oracle_monotonicity(const gam::GraphTerm& term);

// Fraction of adjacent mean pairs consistent with the better of the two
// directions (1 for a single bin).
double near_monotonicity(const gam::GraphTerm& term);

// Largest |means[i + 1] - means[i]| over interior boundaries; the leftmost
// boundary wins ties. Continuous terms with at least two bins only.
JumpResult oracle_largest_jump(const gam::GraphTerm& term);

// Negates means and swaps the CI bounds (lower' = -upper, upper' = -lower).
gam::GraphTerm perturb_invert_y(const gam::GraphTerm& term);

// Exchanges means, CI bounds and weights of categories `a` and `b`.
gam::GraphTerm perturb_swap_categories(const gam::GraphTerm& term,
                                       std::string_view a, std::string_view b);

// Model-level variants: the named term is replaced, everything else kept.
gam::GamModel invert_model_term(const gam::GamModel& model,
                                std::string_view feature);
gam::GamModel swap_model_categories(const gam::GamModel& model,
                                    std::string_view feature,
                                    std::string_view a, std::string_view b);

}  // namespace gamtalk::eval
