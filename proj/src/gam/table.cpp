#include "gamtalk/gam/table.hpp"

#include <set>

#include "gamtalk/error.hpp"

namespace gamtalk::gam {

std::size_t Column::size() const {
  return std::visit([](const auto& v) { return v.size(); }, values);
}

FeatureValue Column::at(std::size_t row) const {
  if (is_numeric()) return numeric().at(row);
  return text().at(row);
}

const Column* Table::find(std::string_view name) const {
  for (const auto& column : features) {
    if (column.name == name) return &column;
  }
  return nullptr;
}

void Table::validate() const {
  std::set<std::string_view> names;
  for (const auto& column : features) {
    if (column.name.empty()) {
      throw Error(ErrorCode::kInvalidArgument, "column with empty name");
    }
    if (!names.insert(column.name).second) {
      throw Error(ErrorCode::kInvalidArgument,
                  "duplicate column '" + column.name + "'");
    }
    if (column.size() != target.size()) {
      throw Error(ErrorCode::kInvalidArgument,
                  "column '" + column.name + "' has " +
                      std::to_string(column.size()) + " rows, target has " +
                      std::to_string(target.size()));
    }
  }
}

}  // namespace gamtalk::gam
