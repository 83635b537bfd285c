#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace gamtalk::app {

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  // Index of a header column; throws Error(kParse) when absent.
  std::size_t column(std::string_view name) const;
};

// RFC 4180: comma separated, double-quoted fields may hold commas, quotes
// ("") and line breaks; CRLF and LF line endings are accepted. Every row must
// have as many fields as the header. Throws Error(kParse) with a line number.
CsvTable parse_csv(std::string_view text);
CsvTable read_csv(const std::filesystem::path& path);

}  // namespace gamtalk::app
