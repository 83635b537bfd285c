#include "gamtalk/gam/model.hpp"

#include <algorithm>
#include <cmath>

#include "gamtalk/error.hpp"

namespace gamtalk::gam {
namespace {

std::string describe_value(const FeatureValue& x) {
  if (const double* d = std::get_if<double>(&x)) return std::to_string(*d);
  return std::get<std::string>(x);
}

std::size_t label_bin(const GraphTerm& term, const FeatureValue& x) {
  const std::string* label = std::get_if<std::string>(&x);
  if (label == nullptr) {
    throw Error(ErrorCode::kInvalidArgument,
                "categorical feature '" + term.feature_name +
                    "' expects a label, got " + describe_value(x));
  }
  auto bin = term.find_label(*label);
  if (!bin) {
    throw Error(ErrorCode::kOutOfDomain, "unknown category '" + *label +
                                             "' for feature '" +
                                             term.feature_name + "'");
  }
  return *bin;
}

double numeric_value(const GraphTerm& term, const FeatureValue& x) {
  const double* d = std::get_if<double>(&x);
  if (d == nullptr) {
    throw Error(ErrorCode::kInvalidArgument,
                "continuous feature '" + term.feature_name +
                    "' expects a number, got '" + std::get<std::string>(x) +
                    "'");
  }
  return *d;
}

}  // namespace

std::size_t continuous_bin(const GraphTerm& term, double x) {
  if (!term.is_continuous()) {
    throw Error(ErrorCode::kInvalidArgument,
                "feature '" + term.feature_name + "' is not continuous");
  }
  if (!(x >= term.domain_min() && x <= term.domain_max())) {
    throw Error(ErrorCode::kOutOfDomain,
                "value " + std::to_string(x) + " outside the domain of '" +
                    term.feature_name + "'");
  }
  bool clamped = false;
  return clamped_bin(term, x, &clamped);
}

std::size_t clamped_bin(const GraphTerm& term, double x, bool* clamped) {
  const auto& edges = term.edges;
  const std::size_t bins = edges.size() - 1;
  *clamped = false;
  if (std::isnan(x) || x < edges.front()) {
    *clamped = true;
    return 0;
  }
  if (x > edges.back()) {
    *clamped = true;
    return bins - 1;
  }
  // First edge strictly greater than x closes the bin that holds x.
  auto it = std::upper_bound(edges.begin(), edges.end(), x);
  auto bin = static_cast<std::size_t>(it - edges.begin());
  return bin == 0 ? 0 : std::min(bin - 1, bins - 1);
}

double term_value_at(const GraphTerm& term, const FeatureValue& x) {
  if (term.is_continuous()) {
    return term.means[continuous_bin(term, numeric_value(term, x))];
  }
  return term.means[label_bin(term, x)];
}

Prediction predict(const GamModel& model, const Row& row) {
  Prediction out;
  out.score = model.intercept;
  for (const auto& term : model.terms) {
    auto it = row.find(term.feature_name);
    if (it == row.end()) {
      throw Error(ErrorCode::kInvalidArgument,
                  "row is missing feature '" + term.feature_name + "'");
    }
    if (term.is_continuous()) {
      bool clamped = false;
      const std::size_t bin =
          clamped_bin(term, numeric_value(term, it->second), &clamped);
      out.out_of_range = out.out_of_range || clamped;
      out.score += term.means[bin];
    } else {
      out.score += term.means[label_bin(term, it->second)];
    }
  }
  return out;
}

std::vector<double> term_contributions(const GraphTerm& term,
                                       const Column& column) {
  std::vector<double> out(column.size());
  for (std::size_t r = 0; r < column.size(); ++r) {
    if (term.is_continuous()) {
      bool clamped = false;
      out[r] = term.means[clamped_bin(
          term, numeric_value(term, column.at(r)), &clamped)];
    } else {
      out[r] = term.means[label_bin(term, column.at(r))];
    }
  }
  return out;
}

std::vector<double> global_importances(const GamModel& model,
                                       const Table& table) {
  std::vector<double> out;
  out.reserve(model.terms.size());
  for (const auto& term : model.terms) {
    const Column* column = table.find(term.feature_name);
    if (column == nullptr) {
      throw Error(ErrorCode::kInvalidArgument,
                  "table has no column for feature '" + term.feature_name +
                      "'");
    }
    if (column->is_numeric() != term.is_continuous()) {
      throw Error(ErrorCode::kInvalidArgument,
                  "column '" + term.feature_name +
                      "' type does not match the model term");
    }
    const auto contributions = term_contributions(term, *column);
    double sum = 0.0;
    for (double c : contributions) sum += std::abs(c);
    out.push_back(contributions.empty()
                      ? 0.0
                      : sum / static_cast<double>(contributions.size()));
  }
  return out;
}

double weighted_importance(const GraphTerm& term) {
  double num = 0.0;
  double den = 0.0;
  for (std::size_t i = 0; i < term.bin_count(); ++i) {
    num += term.weights[i] * std::abs(term.means[i]);
    den += term.weights[i];
  }
  return den > 0.0 ? num / den : 0.0;
}

}  // namespace gamtalk::gam
