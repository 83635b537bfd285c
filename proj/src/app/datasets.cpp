#include "gamtalk/app/datasets.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdlib>
#include <set>

#include "gamtalk/error.hpp"
#include "gamtalk/random.hpp"
#include "gamtalk/text/number_format.hpp"

#ifndef GAMTALK_DEFAULT_DATA_DIR
#define GAMTALK_DEFAULT_DATA_DIR "data"
#endif

namespace gamtalk::app {
namespace {

constexpr std::size_t kSyntheticFeatures = 20;

const char* kTitanicDescription =
    "This is the titanic dataset from kaggle. The sinking of the Titanic is one "
    "of the most infamous shipwrecks in history.\n\n"
    "On April 15, 1912, during her maiden voyage, the widely considered "
    "\xE2\x80\x9Cunsinkable\xE2\x80\x9D RMS Titanic sank after colliding with an "
    "iceberg. Unfortunately, there weren\xE2\x80\x99t enough lifeboats for "
    "everyone onboard, resulting in the death of 1502 out of 2224 passengers and "
    "crew.\n\n"
    "While there was some element of luck involved in surviving, it seems some "
    "groups of people were more likely to survive than others.\n\n"
    "This dataset is used to answers the question: \xE2\x80\x9Cwhat sorts of "
    "people were more likely to survive?\xE2\x80\x9D using passenger data (ie "
    "name, age, gender, socio-economic class, etc).";

const char* kSpaceshipDescription =
    "This is the Spaceship Titanic dataset from kaggle. In the year 2912 the "
    "passenger liner Spaceship Titanic collided with a spacetime anomaly hidden "
    "in a dust cloud while carrying almost 13,000 emigrants to newly habitable "
    "exoplanets.\n\n"
    "Though the ship stayed intact, almost half of the passengers were "
    "transported to an alternate dimension. The records recovered from the "
    "ship's damaged computer system describe each passenger: home planet, "
    "whether they were in cryosleep, cabin, destination, age, VIP status and "
    "how much they spent on the ship's amenities (RoomService, FoodCourt, "
    "ShoppingMall, Spa, VRDeck).\n\n"
    "The task is to predict which passengers were transported.";

const char* kIrisDescription =
    "This is the Iris flower dataset. It contains 150 flowers from three "
    "species of iris (setosa, versicolor and virginica), 50 of each.\n\n"
    "For every flower four measurements in centimeters were recorded: sepal "
    "length, sepal width, petal length and petal width.\n\n"
    "The model predicts whether a flower is Iris-setosa from these four "
    "measurements.";

const char* kDiabetesDescription =
    "This is the Pima Indians diabetes dataset. It describes women of Pima "
    "Indian heritage, at least 21 years old, living near Phoenix, Arizona, who "
    "were tested for diabetes according to World Health Organization "
    "criteria.\n\n"
    "The features are: npreg (number of pregnancies), glu (plasma glucose "
    "concentration in an oral glucose tolerance test), bp (diastolic blood "
    "pressure in mm Hg), skin (triceps skin fold thickness in mm), bmi (body "
    "mass index), ped (diabetes pedigree function, a score of family history) "
    "and age (in years).\n\n"
    "The model predicts whether the woman has diabetes.";

const char* kCaliforniaDescription =
    "This is the California Housing dataset. Each row is a block group from "
    "the 1990 U.S. census, the smallest geographical unit for which the census "
    "publishes sample data (typically 600 to 3,000 people).\n\n"
    "The features describe the block group: median income (in tens of "
    "thousands of dollars), median house age, average number of rooms and "
    "bedrooms per household, population, average household occupancy, and "
    "latitude and longitude.\n\n"
    "The model predicts the median house value of the block group in units of "
    "100,000 dollars.";

const char* kSyntheticDescription =
    "This is a synthetic regression dataset. The outcome y depends additively "
    "on the twenty features x1 to x20 plus a small amount of Gaussian noise.\n\n"
    "The features are drawn independently and uniformly at random. Some of the "
    "features may have no influence on the outcome at all.\n\n"
    "The model predicts the value of y.";

[[noreturn]] void schema_error(const std::string& message) {
  throw Error(ErrorCode::kParse, message);
}

std::string lower(std::string_view s) {
  std::string out(s);
  for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

std::function<double(const std::string&)> binary_target(std::string positive,
                                                         std::string negative) {
  return [positive = std::move(positive),
          negative = std::move(negative)](const std::string& cell) -> double {
    const std::string v = lower(cell);
    if (v == positive) return 1.0;
    if (v == negative) return 0.0;
    schema_error("target value '" + cell + "' is neither '" + positive + "' nor '" +
                 negative + "'");
  };
}

double numeric_target(const std::string& cell) {
  if (auto v = text::parse_double(cell)) return *v;
  schema_error("target value '" + cell + "' is not a number");
}

std::filesystem::path csv_for(std::string_view name, const DatasetOptions& options) {
  auto path = options.csv_path.value_or(options.data_dir.value_or(default_data_dir()) /
                                        (std::string(name) + ".csv"));
  if (!std::filesystem::exists(path)) {
    throw Error(ErrorCode::kNotFound,
                "dataset '" + std::string(name) + "' is not shipped; provide its CSV (" +
                    path.string() + " does not exist)");
  }
  return path;
}

Dataset titanic(const DatasetOptions& options) {
  const auto csv = read_csv(csv_for("titanic", options));
  CsvSchema schema{{{"Pclass", ColumnKind::kNumeric, ""},
                    {"Sex", ColumnKind::kCategorical, ""},
                    {"Age", ColumnKind::kNumeric, ""},
                    {"SibSp", ColumnKind::kNumeric, ""},
                    {"Parch", ColumnKind::kNumeric, ""},
                    {"Fare", ColumnKind::kNumeric, ""},
                    {"Embarked", ColumnKind::kCategorical, ""}},
                   "Survived",
                   binary_target("1", "0")};
  return {"titanic", table_from_csv(csv, schema),
          bundled_context("titanic")};
}

Dataset spaceship_titanic(const DatasetOptions& options) {
  const auto csv = read_csv(csv_for("spaceship_titanic", options));
  CsvSchema schema{{{"HomePlanet", ColumnKind::kCategorical, ""},
                    {"CryoSleep", ColumnKind::kCategorical, ""},
                    {"Destination", ColumnKind::kCategorical, ""},
                    {"Age", ColumnKind::kNumeric, ""},
                    {"VIP", ColumnKind::kCategorical, ""},
                    {"RoomService", ColumnKind::kNumeric, ""},
                    {"FoodCourt", ColumnKind::kNumeric, ""},
                    {"ShoppingMall", ColumnKind::kNumeric, ""},
                    {"Spa", ColumnKind::kNumeric, ""},
                    {"VRDeck", ColumnKind::kNumeric, ""}},
                   "Transported",
                   binary_target("true", "false")};
  return {"spaceship_titanic", table_from_csv(csv, schema),
          bundled_context("spaceship_titanic")};
}

Dataset california_housing(const DatasetOptions& options) {
  const auto csv = read_csv(csv_for("california_housing", options));
  const bool census_names =
      std::find(csv.header.begin(), csv.header.end(), "median_house_value") !=
      csv.header.end();
  CsvSchema schema;
  if (census_names) {
    // Raw census columns: per-household averages are derived below.
    schema = {{{"median_income", ColumnKind::kNumeric, "MedInc"},
               {"housing_median_age", ColumnKind::kNumeric, "HouseAge"},
               {"total_rooms", ColumnKind::kNumeric, ""},
               {"total_bedrooms", ColumnKind::kNumeric, ""},
               {"population", ColumnKind::kNumeric, "Population"},
               {"households", ColumnKind::kNumeric, ""},
               {"latitude", ColumnKind::kNumeric, "Latitude"},
               {"longitude", ColumnKind::kNumeric, "Longitude"}},
              "median_house_value",
              [](const std::string& cell) { return numeric_target(cell) / 100000.0; }};
  } else {
    schema = {{{"MedInc", ColumnKind::kNumeric, ""},
               {"HouseAge", ColumnKind::kNumeric, ""},
               {"AveRooms", ColumnKind::kNumeric, ""},
               {"AveBedrms", ColumnKind::kNumeric, ""},
               {"Population", ColumnKind::kNumeric, ""},
               {"AveOccup", ColumnKind::kNumeric, ""},
               {"Latitude", ColumnKind::kNumeric, ""},
               {"Longitude", ColumnKind::kNumeric, ""}},
              "MedHouseVal",
              numeric_target};
  }
  gam::Table table = table_from_csv(csv, schema);
  if (census_names) {
    auto take = [&](std::string_view name) {
      auto it = std::find_if(table.features.begin(), table.features.end(),
                             [&](const gam::Column& c) { return c.name == name; });
      auto values = it->numeric();
      table.features.erase(it);
      return values;
    };
    const auto rooms = take("total_rooms");
    const auto bedrooms = take("total_bedrooms");
    const auto households = take("households");
    const auto* population = table.find("Population");
    std::vector<double> ave_rooms, ave_bedrms, ave_occup;
    for (std::size_t i = 0; i < households.size(); ++i) {
      if (!(households[i] > 0)) schema_error("households must be positive");
      ave_rooms.push_back(rooms[i] / households[i]);
      ave_bedrms.push_back(bedrooms[i] / households[i]);
      ave_occup.push_back(population->numeric()[i] / households[i]);
    }
    std::vector<gam::Column> ordered;
    auto move_col = [&](std::string_view name) {
      ordered.push_back(*table.find(name));
    };
    move_col("MedInc");
    move_col("HouseAge");
    ordered.push_back({"AveRooms", ave_rooms});
    ordered.push_back({"AveBedrms", ave_bedrms});
    move_col("Population");
    ordered.push_back({"AveOccup", ave_occup});
    move_col("Latitude");
    move_col("Longitude");
    table.features = std::move(ordered);
    table.target_name = "MedHouseVal";
  }
  return {"california_housing", std::move(table),
          bundled_context("california_housing")};
}

Dataset iris(const DatasetOptions& options) {
  const auto dir = options.data_dir.value_or(default_data_dir());
  const auto csv = read_csv(options.csv_path.value_or(dir / "iris.csv"));
  CsvSchema schema{{{"sepal_length", ColumnKind::kNumeric, ""},
                    {"sepal_width", ColumnKind::kNumeric, ""},
                    {"petal_length", ColumnKind::kNumeric, ""},
                    {"petal_width", ColumnKind::kNumeric, ""}},
                   "species",
                   [](const std::string& cell) -> double {
                     const std::string v = lower(cell);
                     if (v == "setosa" || v == "iris-setosa") return 1.0;
                     if (v == "versicolor" || v == "iris-versicolor" ||
                         v == "virginica" || v == "iris-virginica") {
                       return 0.0;
                     }
                     schema_error("unknown iris species '" + cell + "'");
                   }};
  gam::Table table = table_from_csv(csv, schema);
  table.target_name = "is_setosa";
  return {"iris", std::move(table),
          bundled_context("iris")};
}

Dataset diabetes(const DatasetOptions& options) {
  const auto dir = options.data_dir.value_or(default_data_dir());
  const auto csv = read_csv(options.csv_path.value_or(dir / "pima_diabetes.csv"));
  CsvSchema schema{{{"npreg", ColumnKind::kNumeric, ""},
                    {"glu", ColumnKind::kNumeric, ""},
                    {"bp", ColumnKind::kNumeric, ""},
                    {"skin", ColumnKind::kNumeric, ""},
                    {"bmi", ColumnKind::kNumeric, ""},
                    {"ped", ColumnKind::kNumeric, ""},
                    {"age", ColumnKind::kNumeric, ""}},
                   "type",
                   binary_target("yes", "no")};
  gam::Table table = table_from_csv(csv, schema);
  table.target_name = "diabetes";
  return {"diabetes", std::move(table),
          bundled_context("diabetes")};
}

Dataset synthetic_additive(const DatasetOptions& options) {
  if (options.rows < 20) {
    throw Error(ErrorCode::kInvalidArgument, "synthetic_additive needs at least 20 rows");
  }
  Rng rng(options.seed);
  std::vector<std::vector<double>> x(kSyntheticFeatures,
                                     std::vector<double>(options.rows));
  gam::Table table;
  table.target_name = "y";
  table.target.resize(options.rows);
  for (std::size_t r = 0; r < options.rows; ++r) {
    x[0][r] = rng.uniform(-3.0, 3.0);
    for (std::size_t f = 1; f < kSyntheticFeatures; ++f) x[f][r] = rng.uniform(-2.0, 2.0);
    table.target[r] = std::sin(x[0][r]) + 0.5 * x[1][r] + 0.1 * rng.normal();
  }
  for (std::size_t f = 0; f < kSyntheticFeatures; ++f) {
    table.features.push_back({"x" + std::to_string(f + 1), std::move(x[f])});
  }
  return {"synthetic_additive", std::move(table),
          bundled_context("synthetic_additive")};
}

}  // namespace

std::filesystem::path default_data_dir() {
  if (const char* env = std::getenv("GAMTALK_DATA_DIR"); env != nullptr && *env != '\0') {
    return env;
  }
  return GAMTALK_DEFAULT_DATA_DIR;
}

const std::vector<std::string>& bundled_dataset_names() {
  static const std::vector<std::string> names{"california_housing", "diabetes",
                                              "iris",               "titanic",
                                              "spaceship_titanic",  "synthetic_additive"};
  return names;
}

Dataset load_bundled_dataset(std::string_view name, const DatasetOptions& options) {
  if (name == "california_housing") return california_housing(options);
  if (name == "diabetes") return diabetes(options);
  if (name == "iris") return iris(options);
  if (name == "titanic") return titanic(options);
  if (name == "spaceship_titanic") return spaceship_titanic(options);
  if (name == "synthetic_additive") return synthetic_additive(options);
  throw Error(ErrorCode::kNotFound, "unknown dataset '" + std::string(name) + "'");
}

prompt::DatasetContext bundled_context(std::string_view name) {
  if (name == "california_housing") {
    return {kCaliforniaDescription, "the predicted median house value"};
  }
  if (name == "diabetes") {
    return {kDiabetesDescription, "the logprobs to the probability that the woman has diabetes"};
  }
  if (name == "iris") {
    return {kIrisDescription, "the logprobs to the probability that the flower is Iris-setosa"};
  }
  if (name == "titanic") {
    return {kTitanicDescription, "the logprobs to the probability that the passenger survived"};
  }
  if (name == "spaceship_titanic") {
    return {kSpaceshipDescription,
            "the logprobs to the probability that the passenger was transported to an "
            "alternate dimension"};
  }
  if (name == "synthetic_additive") return {kSyntheticDescription, "the predicted value of y"};
  throw Error(ErrorCode::kNotFound, "unknown dataset '" + std::string(name) + "'");
}

bool is_missing(std::string_view cell) {
  return cell.empty() || cell == "NA" || cell == "NaN" || cell == "nan" || cell == "?";
}

gam::Table table_from_csv(const CsvTable& csv, const CsvSchema& schema) {
  std::vector<std::size_t> cols;
  for (const auto& spec : schema.features) cols.push_back(csv.column(spec.name));
  const std::size_t target_col = csv.column(schema.target);

  std::vector<std::vector<double>> numeric(schema.features.size());
  std::vector<std::vector<std::string>> labels(schema.features.size());
  gam::Table table;
  table.target_name = schema.target;
  for (std::size_t r = 0; r < csv.rows.size(); ++r) {
    const auto& row = csv.rows[r];
    bool missing = is_missing(row[target_col]);
    for (std::size_t c : cols) missing = missing || is_missing(row[c]);
    if (missing) continue;
    for (std::size_t f = 0; f < cols.size(); ++f) {
      const std::string& cell = row[cols[f]];
      if (schema.features[f].kind == ColumnKind::kCategorical) {
        labels[f].push_back(cell);
        continue;
      }
      auto v = text::parse_double(cell);
      if (!v || !std::isfinite(*v)) {
        schema_error("row " + std::to_string(r + 2) + ": column '" +
                     schema.features[f].name + "' expects a number, got '" + cell + "'");
      }
      numeric[f].push_back(*v);
    }
    try {
      table.target.push_back(schema.target_map(row[target_col]));
    } catch (const Error& e) {
      schema_error("row " + std::to_string(r + 2) + ": " + e.what());
    }
  }
  if (table.target.empty()) schema_error("CSV has no complete rows");
  for (std::size_t f = 0; f < schema.features.size(); ++f) {
    const auto& spec = schema.features[f];
    gam::Column col;
    col.name = spec.rename.empty() ? spec.name : spec.rename;
    if (spec.kind == ColumnKind::kCategorical) {
      col.values = std::move(labels[f]);
    } else {
      col.values = std::move(numeric[f]);
    }
    table.features.push_back(std::move(col));
  }
  table.validate();
  return table;
}

gam::Table infer_table(const CsvTable& csv, std::string_view target) {
  const std::size_t target_col = csv.column(target);
  CsvSchema schema;
  schema.target = std::string(target);
  for (std::size_t c = 0; c < csv.header.size(); ++c) {
    if (c == target_col) continue;
    bool numeric = true;
    for (const auto& row : csv.rows) {
      if (!is_missing(row[c]) && !text::parse_double(row[c])) {
        numeric = false;
        break;
      }
    }
    schema.features.push_back(
        {csv.header[c], numeric ? ColumnKind::kNumeric : ColumnKind::kCategorical, ""});
  }
  bool numeric_target_col = true;
  std::set<std::string> distinct;
  for (const auto& row : csv.rows) {
    const auto& cell = row[target_col];
    if (is_missing(cell)) continue;
    distinct.insert(cell);
    if (!text::parse_double(cell)) numeric_target_col = false;
  }
  if (numeric_target_col) {
    schema.target_map = numeric_target;
  } else if (distinct.size() == 2) {
    const std::string positive = *distinct.rbegin();
    schema.target_map = [positive](const std::string& cell) {
      return cell == positive ? 1.0 : 0.0;
    };
  } else {
    schema_error("target '" + std::string(target) +
                 "' must be numeric or have exactly two values");
  }
  return table_from_csv(csv, schema);
}

double synthetic_effect(std::string_view feature, double x) {
  if (feature == "x1") return std::sin(x);
  if (feature == "x2") return 0.5 * x;
  return 0.0;
}

}  // namespace gamtalk::app
