#include "gamtalk/text/tokens.hpp"

#include <fstream>

#include "gamtalk/error.hpp"

namespace gamtalk::text {
namespace {

bool is_continuation(char c) {
  return (static_cast<unsigned char>(c) & 0xC0) == 0x80;
}

std::size_t code_point_bytes(std::string_view text, std::size_t pos) {
  std::size_t n = 1;
  while (pos + n < text.size() && is_continuation(text[pos + n])) ++n;
  return n;
}

}  // namespace

std::size_t utf8_length(std::string_view text) {
  std::size_t n = 0;
  for (char c : text) {
    if (!is_continuation(c)) ++n;
  }
  return n;
}

TokenEstimator TokenEstimator::from_vocabulary_file(
    const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw Error(ErrorCode::kIo, "cannot open vocabulary " + path.string());
  }
  std::unordered_set<std::string> entries;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!line.empty()) entries.insert(line);
  }
  if (entries.empty()) {
    throw Error(ErrorCode::kIo, "vocabulary " + path.string() + " is empty");
  }
  return from_vocabulary(std::move(entries));
}

TokenEstimator TokenEstimator::from_vocabulary(
    std::unordered_set<std::string> entries) {
  auto vocab = std::make_shared<Vocabulary>();
  for (const auto& e : entries) {
    vocab->max_length = std::max(vocab->max_length, e.size());
  }
  vocab->entries = std::move(entries);
  TokenEstimator out;
  out.vocab_ = std::move(vocab);
  return out;
}

std::size_t TokenEstimator::count(std::string_view text) const {
  if (!vocab_) return (utf8_length(text) + 3) / 4;
  std::size_t tokens = 0;
  std::size_t pos = 0;
  std::string probe;
  while (pos < text.size()) {
    std::size_t matched = 0;
    const std::size_t longest = std::min(vocab_->max_length, text.size() - pos);
    for (std::size_t len = longest; len > 0; --len) {
      probe.assign(text.substr(pos, len));
      if (vocab_->entries.count(probe) != 0) {
        matched = len;
        break;
      }
    }
    pos += matched > 0 ? matched : code_point_bytes(text, pos);
    ++tokens;
  }
  return tokens;
}

std::size_t estimate_tokens(std::string_view text,
                            const TokenEstimator& estimator) {
  return estimator.count(text);
}

}  // namespace gamtalk::text
