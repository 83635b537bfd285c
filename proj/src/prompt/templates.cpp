#include "gamtalk/prompt/templates.hpp"

#include <cctype>
#include <utility>

#include "gamtalk/error.hpp"
#include "gamtalk/file_util.hpp"

namespace gamtalk::prompt {
namespace detail {
// Generated at configure time from templates/*.txt.
const std::vector<std::pair<std::string, std::string>>& default_templates();
}  // namespace detail

TemplateSet TemplateSet::defaults() {
  TemplateSet set;
  for (const auto& [name, text] : detail::default_templates()) {
    set.templates_.emplace(name, text);
  }
  return set;
}

const std::vector<std::string>& TemplateSet::names() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> out;
    for (const auto& entry : detail::default_templates()) {
      out.push_back(entry.first);
    }
    return out;
  }();
  return names;
}

void TemplateSet::load_overrides(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir)) {
    throw Error(ErrorCode::kIo, "template directory " + dir.string() +
                                    " does not exist");
  }
  for (const auto& name : names()) {
    const auto file = dir / (name + ".txt");
    if (!std::filesystem::exists(file)) continue;
    std::string text = read_file(file);
    if (!text.empty() && text.back() == '\n') text.pop_back();
    templates_[name] = std::move(text);
  }
}

const std::string& TemplateSet::raw(std::string_view name) const {
  auto it = templates_.find(name);
  if (it == templates_.end()) {
    throw Error(ErrorCode::kNotFound,
                "no prompt template named '" + std::string(name) + "'");
  }
  return it->second;
}

void TemplateSet::set(std::string name, std::string text) {
  templates_[std::move(name)] = std::move(text);
}

std::string TemplateSet::render(
    std::string_view name,
    const std::map<std::string, std::string, std::less<>>& vars) const {
  return substitute(raw(name), vars);
}

std::string substitute(
    std::string_view tmpl,
    const std::map<std::string, std::string, std::less<>>& vars) {
  std::string out;
  out.reserve(tmpl.size());
  std::size_t pos = 0;
  while (pos < tmpl.size()) {
    const char c = tmpl[pos];
    if (c == '{') {
      std::size_t end = pos + 1;
      while (end < tmpl.size() &&
             (std::islower(static_cast<unsigned char>(tmpl[end])) ||
              tmpl[end] == '_')) {
        ++end;
      }
      if (end < tmpl.size() && tmpl[end] == '}' && end > pos + 1) {
        auto it = vars.find(tmpl.substr(pos + 1, end - pos - 1));
        if (it != vars.end()) {
          out += it->second;
          pos = end + 1;
          continue;
        }
      }
    }
    out.push_back(c);
    ++pos;
  }
  return out;
}

}  // namespace gamtalk::prompt
