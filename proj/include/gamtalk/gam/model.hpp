#pragma once

#include <map>
#include <string>
#include <vector>

#include "gamtalk/gam/table.hpp"
#include "gamtalk/gam/types.hpp"

namespace gamtalk::gam {

using Row = std::map<std::string, FeatureValue, std::less<>>;

// Index of the bin containing `x`. Throws kOutOfDomain when x lies outside
// [edges.front(), edges.back()] and kInvalidArgument for categorical terms.
std::size_t continuous_bin(const GraphTerm& term, double x);

// Same as continuous_bin but clamps out-of-domain values to the nearest bin.
std::size_t clamped_bin(const GraphTerm& term, double x, bool* clamped);

// Contribution of `term` at `x`. Unknown labels and out-of-domain numbers
// throw; no clamping happens here.
double term_value_at(const GraphTerm& term, const FeatureValue& x);

struct Prediction {
  double score = 0.0;
  // Set when any continuous input was clamped into the term's domain.
  bool out_of_range = false;
};

// intercept + sum of term contributions. Continuous values outside a term's
// domain are clamped; missing features throw kInvalidArgument.
Prediction predict(const GamModel& model, const Row& row);

// Row-wise contributions for one term over a table column.
std::vector<double> term_contributions(const GraphTerm& term,
                                       const Column& column);

// Mean absolute contribution of every term over the table rows (each row has
// weight one), in model term order.
std::vector<double> global_importances(const GamModel& model,
                                       const Table& table);

// Mean absolute contribution using the term's own bin weights.
double weighted_importance(const GraphTerm& term);

}  // namespace gamtalk::gam
