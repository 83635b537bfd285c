#pragma once

#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "gamtalk/gam/types.hpp"

namespace gamtalk::gam {

struct Column {
  std::string name;
  std::variant<std::vector<double>, std::vector<std::string>> values;

  bool is_numeric() const {
    return std::holds_alternative<std::vector<double>>(values);
  }
  const std::vector<double>& numeric() const {
    return std::get<std::vector<double>>(values);
  }
  const std::vector<std::string>& text() const {
    return std::get<std::vector<std::string>>(values);
  }
  std::size_t size() const;
  FeatureValue at(std::size_t row) const;
};

// Column-major tabular dataset with a numeric target.
struct Table {
  std::vector<Column> features;
  std::string target_name;
  std::vector<double> target;

  std::size_t row_count() const { return target.size(); }
  const Column* find(std::string_view name) const;

  // Throws when column lengths disagree or names repeat.
  void validate() const;
};

}  // namespace gamtalk::gam
