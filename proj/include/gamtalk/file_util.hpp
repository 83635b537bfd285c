#pragma once

#include <filesystem>
#include <string>
#include <string_view>

namespace gamtalk {

// Reads a whole file; throws Error(kIo) when it cannot be opened.
std::string read_file(const std::filesystem::path& path);

// Writes `content` to a sibling temporary file and renames it over `path`, so
// readers observe either the old or the new content. Parent directories are
// created on demand.
void write_file_atomic(const std::filesystem::path& path,
                       std::string_view content);

}  // namespace gamtalk
