#include "gamtalk/eval/grading.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <regex>

#include "gamtalk/text/number_format.hpp"

namespace gamtalk::eval {
namespace {

struct NumberToken {
  double value = 0.0;
  std::size_t begin = 0;
  std::size_t end = 0;
  bool in_interval = false;
};

bool is_digit(char c) { return std::isdigit(static_cast<unsigned char>(c)) != 0; }

bool is_word(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) != 0 || c == '_';
}

// Replaces the Unicode minus sign with '-' so signs read uniformly.
std::string normalize_minus(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  for (std::size_t i = 0; i < text.size(); ++i) {
    if (text.compare(i, 3, "\xE2\x88\x92") == 0) {
      out.push_back('-');
      i += 2;
    } else {
      out.push_back(text[i]);
    }
  }
  return out;
}

std::vector<NumberToken> scan_numbers(const std::string& s) {
  std::vector<NumberToken> out;
  std::size_t i = 0;
  while (i < s.size()) {
    std::size_t start = i;
    std::size_t p = i;
    if ((s[p] == '-' || s[p] == '+') && (p == 0 || !is_digit(s[p - 1]))) ++p;
    const bool lead_digit = p < s.size() && is_digit(s[p]);
    const bool lead_point =
        p + 1 < s.size() && s[p] == '.' && is_digit(s[p + 1]);
    const bool word_before = start > 0 && (is_word(s[start - 1]) || s[start - 1] == '.');
    if (!(lead_digit || lead_point) || (word_before && p == start)) {
      ++i;
      if (lead_digit) {
        while (i < s.size() && (is_digit(s[i]) || s[i] == '.')) ++i;
      }
      continue;
    }
    while (p < s.size() && is_digit(s[p])) ++p;
    if (p + 1 < s.size() && s[p] == '.' && is_digit(s[p + 1])) {
      ++p;
      while (p < s.size() && is_digit(s[p])) ++p;
    }
    if (p < s.size() && (s[p] == 'e' || s[p] == 'E')) {
      std::size_t q = p + 1;
      if (q < s.size() && (s[q] == '-' || s[q] == '+')) ++q;
      if (q < s.size() && is_digit(s[q])) {
        while (q < s.size() && is_digit(s[q])) ++q;
        p = q;
      }
    }
    if (auto value = text::parse_double(std::string_view(s).substr(start, p - start))) {
      out.push_back({*value, start, p, false});
    }
    i = p;
  }
  return out;
}

std::size_t skip_space_back(const std::string& s, std::size_t pos) {
  while (pos > 0 && std::isspace(static_cast<unsigned char>(s[pos - 1]))) --pos;
  return pos;
}

std::size_t skip_space(const std::string& s, std::size_t pos) {
  while (pos < s.size() && std::isspace(static_cast<unsigned char>(s[pos]))) ++pos;
  return pos;
}

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
};

// Marks numbers written as "(a, b)" or "[a, b)" and returns the intervals in
// order of appearance.
std::vector<Interval> mark_intervals(const std::string& s,
                                     std::vector<NumberToken>& numbers) {
  std::vector<Interval> out;
  for (std::size_t k = 0; k + 1 < numbers.size(); ++k) {
    auto& a = numbers[k];
    auto& b = numbers[k + 1];
    const std::size_t open = skip_space_back(s, a.begin);
    if (open == 0 || (s[open - 1] != '(' && s[open - 1] != '[')) continue;
    const std::size_t comma = skip_space(s, a.end);
    if (comma >= s.size() || s[comma] != ',' || skip_space(s, comma + 1) != b.begin) {
      continue;
    }
    const std::size_t close = skip_space(s, b.end);
    if (close >= s.size() || (s[close] != ')' && s[close] != ']')) continue;
    a.in_interval = b.in_interval = true;
    out.push_back({a.value, b.value});
    ++k;
  }
  return out;
}

std::string lowercase(std::string_view text) {
  std::string out(text);
  for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

std::string number_text(double value, int decimals) {
  return text::format_rounded(value, decimals);
}

bool within(double a, double b, double tolerance) {
  return std::abs(a - b) <= tolerance;
}

bool jump_named(const JumpCandidate& c, const std::vector<NumberToken>& numbers,
                const std::vector<Interval>& intervals, double half_unit) {
  const double x = c.jump.boundary_x;
  for (const auto& n : numbers) {
    if (!n.in_interval && std::abs(n.value - x) < c.width) return true;
  }
  for (std::size_t k = 0; k + 1 < intervals.size(); ++k) {
    if (std::abs(intervals[k].hi - x) < c.width &&
        std::abs(intervals[k + 1].lo - x) < c.width) {
      return true;
    }
  }
  bool before = false;
  bool after = false;
  for (std::size_t k = 0; k < numbers.size(); ++k) {
    if (numbers[k].in_interval) continue;
    const bool b = within(numbers[k].value, c.before, half_unit);
    const bool a = within(numbers[k].value, c.after, half_unit);
    if (b && !before) {
      before = true;
    } else if (a) {
      after = true;
    }
  }
  return before && after;
}

}  // namespace

JumpTruth jump_truth(const gam::GraphTerm& term, int decimals) {
  const JumpResult best = oracle_largest_jump(term);
  const double half_unit = 0.5 * std::pow(10.0, -decimals);
  auto candidate = [&](std::size_t i) {
    JumpCandidate c;
    const double delta = term.means[i + 1] - term.means[i];
    c.jump = {i, term.edges[i + 1], delta, std::abs(delta)};
    c.before = term.means[i];
    c.after = term.means[i + 1];
    c.width = std::min(term.edges[i + 1] - term.edges[i],
                       term.edges[i + 2] - term.edges[i + 1]);
    return c;
  };
  JumpTruth out;
  out.candidates.push_back(candidate(best.index));
  for (std::size_t i = 0; i + 1 < term.means.size(); ++i) {
    if (i == best.index) continue;
    const double magnitude = std::abs(term.means[i + 1] - term.means[i]);
    if (best.magnitude - magnitude <= half_unit) out.candidates.push_back(candidate(i));
  }
  return out;
}

std::vector<double> extract_numbers(std::string_view response) {
  std::vector<double> out;
  for (const auto& n : scan_numbers(normalize_minus(response))) out.push_back(n.value);
  return out;
}

std::optional<double> parse_numeric_answer(std::string_view response) {
  const std::string s = normalize_minus(response);
  auto numbers = scan_numbers(s);
  if (numbers.empty()) return std::nullopt;
  mark_intervals(s, numbers);
  for (auto it = numbers.rbegin(); it != numbers.rend(); ++it) {
    if (!it->in_interval) return it->value;
  }
  return numbers.back().value;
}

std::optional<MonotonicityClass> parse_monotonicity_answer(
    std::string_view response) {
  static const std::vector<std::pair<std::regex, std::string>> kRewrites = [] {
    std::vector<std::pair<std::regex, std::string>> r;
    auto add = [&](const char* pattern, const char* replacement) {
      r.emplace_back(std::regex(pattern), replacement);
    };
    add("n't\\b", " not");
    add("[_\\-]", " ");
    add("\\s+", " ");
    add("\\bmonoton(ic(ally)?|e)\\b", "monotone");
    add("\\bstrictly ", "");
    add("\\bnon ?decreasing\\b", "increasing");
    add("\\bnon ?increasing\\b", "decreasing");
    add("\\bnon ?monotone\\b", "not monotone");
    return r;
  }();
  static const std::regex kPhrase(
      "\\b(?:(neither (?:monotone )?(?:increasing|decreasing) nor "
      "(?:monotone )?(?:increasing|decreasing))"
      "|(not (?:monotone )?(?:increasing|decreasing)"
      "(?: or (?:monotone )?(?:increasing|decreasing))?)"
      "|(not (?:a )?monotone)"
      "|((?:monotone )?increasing)"
      "|((?:monotone )?decreasing)"
      "|(constant))\\b");

  std::string text = lowercase(response);
  for (const auto& [pattern, replacement] : kRewrites) {
    text = std::regex_replace(text, pattern, replacement);
  }
  std::optional<MonotonicityClass> last;
  for (std::sregex_iterator it(text.begin(), text.end(), kPhrase), end; it != end;
       ++it) {
    const auto& m = *it;
    if (m[1].matched || m[2].matched || m[3].matched) {
      last = MonotonicityClass::kNotMonotone;
    } else if (m[4].matched) {
      last = MonotonicityClass::kIncreasing;
    } else if (m[5].matched) {
      last = MonotonicityClass::kDecreasing;
    } else {
      last = MonotonicityClass::kConstant;
    }
  }
  return last;
}

CaseVerdict grade_case(const prompt::TaskKind& task, const Truth& truth,
                       std::string_view response, const GradeOptions& opts) {
  CaseVerdict v;
  v.task = task;
  v.truth = truth;
  v.llm_answer = std::string(response);
  const double half_unit = 0.5 * std::pow(10.0, -opts.decimals);

  if (const double* value = std::get_if<double>(&truth)) {
    const auto parsed = parse_numeric_answer(response);
    if (!parsed) {
      v.unparseable = true;
      return v;
    }
    v.parsed_answer = text::float_repr(*parsed);
    v.correct = std::abs(*parsed - *value) <= half_unit;
  } else if (const auto* cls = std::get_if<MonotonicityClass>(&truth)) {
    const auto parsed = parse_monotonicity_answer(response);
    if (!parsed) {
      v.unparseable = true;
      return v;
    }
    v.parsed_answer = std::string(to_string(*parsed));
    if (*cls == MonotonicityClass::kConstant) {
      v.correct = *parsed != MonotonicityClass::kNotMonotone;
    } else {
      v.correct = *parsed == *cls;
    }
  } else {
    const auto& jump = std::get<JumpTruth>(truth);
    const std::string s = normalize_minus(response);
    auto numbers = scan_numbers(s);
    if (numbers.empty()) {
      v.unparseable = true;
      return v;
    }
    const auto intervals = mark_intervals(s, numbers);
    std::string listed;
    for (const auto& n : numbers) {
      if (!listed.empty()) listed += ", ";
      listed += text::float_repr(n.value);
    }
    v.parsed_answer = listed;
    v.correct = std::any_of(jump.candidates.begin(), jump.candidates.end(),
                            [&](const JumpCandidate& c) {
                              return jump_named(c, numbers, intervals, half_unit);
                            });
  }
  return v;
}

std::string render_truth(const Truth& truth, const GradeOptions& opts) {
  if (const double* value = std::get_if<double>(&truth)) {
    return "The mean value of the graph at this point is " +
           number_text(*value, opts.decimals) + ".";
  }
  if (const auto* cls = std::get_if<MonotonicityClass>(&truth)) {
    switch (*cls) {
      case MonotonicityClass::kIncreasing:
        return "The graph is monotone increasing.";
      case MonotonicityClass::kDecreasing:
        return "The graph is monotone decreasing.";
      case MonotonicityClass::kConstant:
        return "The graph is constant.";
      case MonotonicityClass::kNotMonotone:
        return "The graph is not monotone.";
    }
  }
  const auto& c = std::get<JumpTruth>(truth).best();
  return "The largest jump is at x = " + text::float_repr(c.jump.boundary_x) +
         ", from " + number_text(c.before, opts.decimals) + " to " +
         number_text(c.after, opts.decimals) + ", a change of " +
         number_text(c.jump.delta, opts.decimals) + ".";
}

}  // namespace gamtalk::eval
