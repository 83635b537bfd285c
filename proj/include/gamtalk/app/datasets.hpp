#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "gamtalk/app/csv.hpp"
#include "gamtalk/gam/table.hpp"
#include "gamtalk/prompt/conversation.hpp"

namespace gamtalk::app {

struct Dataset {
  std::string name;
  gam::Table table;
  prompt::DatasetContext context;
};

struct DatasetOptions {
  // CSV for the datasets that are not shipped (california_housing, titanic,
  // spaceship_titanic). Defaults to <data_dir>/<name>.csv.
  std::optional<std::filesystem::path> csv_path;
  std::optional<std::filesystem::path> data_dir;
  // synthetic_additive only.
  std::uint64_t seed = 0;
  std::size_t rows = 2000;
};

// GAMTALK_DATA_DIR from the environment, else the source tree's data/.
std::filesystem::path default_data_dir();

const std::vector<std::string>& bundled_dataset_names();

// Throws Error(kNotFound) for an unknown name or a missing CSV and
// Error(kParse) when the CSV does not match the dataset's schema.
Dataset load_bundled_dataset(std::string_view name, const DatasetOptions& options = {});

// Description and target semantics of a bundled dataset, without loading it.
prompt::DatasetContext bundled_context(std::string_view name);

enum class ColumnKind { kNumeric, kCategorical };

struct ColumnSpec {
  std::string name;
  ColumnKind kind = ColumnKind::kNumeric;
  // Name in the resulting table; empty keeps `name`.
  std::string rename;
};

struct CsvSchema {
  std::vector<ColumnSpec> features;
  std::string target;
  // Maps a raw target cell to a number; throws on values outside the schema.
  std::function<double(const std::string&)> target_map;
};

// Rows with a missing cell ("", "NA", "NaN", "?") in any used column are
// dropped.
gam::Table table_from_csv(const CsvTable& csv, const CsvSchema& schema);

// Schema inferred from the data: a column is numeric when every present cell
// parses as a number. The target must be numeric or have two distinct values
// (mapped to 0/1 in sorted order).
gam::Table infer_table(const CsvTable& csv, std::string_view target);

// Generating functions of synthetic_additive: sin(x) for x1, 0.5 x for x2,
// zero for the distractors x3..x20.
double synthetic_effect(std::string_view feature, double x);

bool is_missing(std::string_view cell);

}  // namespace gamtalk::app
