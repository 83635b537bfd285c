#include "gamtalk/app/csv.hpp"

#include "gamtalk/error.hpp"
#include "gamtalk/file_util.hpp"

namespace gamtalk::app {

std::size_t CsvTable::column(std::string_view name) const {
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (header[i] == name) return i;
  }
  throw Error(ErrorCode::kParse, "CSV has no column '" + std::string(name) + "'");
}

CsvTable parse_csv(std::string_view text) {
  if (text.size() >= 3 && text.substr(0, 3) == "\xEF\xBB\xBF") text.remove_prefix(3);
  std::vector<std::vector<std::string>> records;
  std::vector<std::size_t> record_lines;
  std::vector<std::string> record;
  std::string field;
  std::size_t line = 1;
  std::size_t record_line = 1;
  bool quoted = false;
  bool field_was_quoted = false;

  auto end_field = [&] {
    record.push_back(std::move(field));
    field.clear();
    field_was_quoted = false;
  };
  auto end_record = [&] {
    end_field();
    if (!(record.size() == 1 && record[0].empty())) {
      records.push_back(std::move(record));
      record_lines.push_back(record_line);
    }
    record.clear();
    record_line = line;
  };

  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field.push_back('"');
          ++i;
        } else {
          quoted = false;
        }
      } else {
        if (c == '\n') ++line;
        field.push_back(c);
      }
      continue;
    }
    switch (c) {
      case '"':
        if (!field.empty() || field_was_quoted) {
          throw Error(ErrorCode::kParse, "CSV line " + std::to_string(line) +
                                             ": stray quote inside a field");
        }
        quoted = true;
        field_was_quoted = true;
        break;
      case ',':
        end_field();
        break;
      case '\r':
        if (i + 1 < text.size() && text[i + 1] == '\n') break;
        field.push_back(c);
        break;
      case '\n':
        ++line;
        end_record();
        break;
      default:
        if (field_was_quoted) {
          throw Error(ErrorCode::kParse, "CSV line " + std::to_string(line) +
                                             ": text after a closing quote");
        }
        field.push_back(c);
    }
  }
  if (quoted) {
    throw Error(ErrorCode::kParse, "CSV line " + std::to_string(record_line) +
                                       ": unterminated quoted field");
  }
  if (!field.empty() || field_was_quoted || !record.empty()) end_record();

  if (records.empty()) throw Error(ErrorCode::kParse, "CSV has no header");
  CsvTable out;
  out.header = std::move(records.front());
  for (std::size_t r = 1; r < records.size(); ++r) {
    if (records[r].size() != out.header.size()) {
      throw Error(ErrorCode::kParse,
                  "CSV line " + std::to_string(record_lines[r]) + ": expected " +
                      std::to_string(out.header.size()) + " fields, found " +
                      std::to_string(records[r].size()));
    }
    out.rows.push_back(std::move(records[r]));
  }
  return out;
}

CsvTable read_csv(const std::filesystem::path& path) {
  try {
    return parse_csv(read_file(path));
  } catch (const Error& e) {
    if (e.code() != ErrorCode::kParse) throw;
    throw Error(ErrorCode::kParse, path.string() + ": " + e.what());
  }
}

}  // namespace gamtalk::app
