#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace gamtalk::prompt {

// Named prompt templates with {placeholder} slots. Placeholders are
// lower-case identifiers in braces; braces around anything else (JSON in a
// graph, for example) are left alone.
class TemplateSet {
 public:
  // The shipped defaults; identical to the files under templates/.
  static TemplateSet defaults();

  // Names every template must define.
  static const std::vector<std::string>& names();

  // Replaces templates for which `<dir>/<name>.txt` exists. One trailing
  // newline in a file is dropped. Throws Error(kIo) if `dir` is missing.
  void load_overrides(const std::filesystem::path& dir);

  const std::string& raw(std::string_view name) const;
  void set(std::string name, std::string text);

  // Substitutes each known placeholder once; substituted values are not
  // re-scanned.
  std::string render(std::string_view name,
                     const std::map<std::string, std::string, std::less<>>&
                         vars = {}) const;

 private:
  std::map<std::string, std::string, std::less<>> templates_;
};

std::string substitute(std::string_view tmpl,
                       const std::map<std::string, std::string, std::less<>>& vars);

}  // namespace gamtalk::prompt
