#pragma once

#include <cstddef>
#include <filesystem>
#include <memory>
#include <string>
#include <string_view>
#include <unordered_set>

namespace gamtalk::text {

// Approximate token counter.
//
// Heuristic mode needs no data: ceil(code points / 4). Vocabulary mode loads
// a subword list (one entry per line, most frequent first) and counts tokens
// by greedy longest match; text not covered by any entry costs one token per
// code point.
class TokenEstimator {
 public:
  enum class Mode { kHeuristic, kVocabulary };

  TokenEstimator() = default;

  static TokenEstimator heuristic() { return {}; }
  // Throws Error(kIo) when the file cannot be read or holds no entries.
  static TokenEstimator from_vocabulary_file(const std::filesystem::path& path);
  static TokenEstimator from_vocabulary(std::unordered_set<std::string> entries);

  Mode mode() const { return vocab_ ? Mode::kVocabulary : Mode::kHeuristic; }
  std::size_t count(std::string_view text) const;

 private:
  struct Vocabulary {
    std::unordered_set<std::string> entries;
    std::size_t max_length = 0;
  };
  std::shared_ptr<const Vocabulary> vocab_;
};

std::size_t utf8_length(std::string_view text);

std::size_t estimate_tokens(std::string_view text,
                            const TokenEstimator& estimator = {});

}  // namespace gamtalk::text
