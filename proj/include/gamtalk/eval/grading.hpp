#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "gamtalk/eval/oracles.hpp"
#include "gamtalk/prompt/conversation.hpp"

namespace gamtalk::eval {

// One acceptable answer to a largest-jump question.
struct JumpCandidate {
  JumpResult jump;
  double before = 0.0;
  double after = 0.0;
  // Smaller width of the two bins meeting at the boundary.
  double width = 0.0;

  bool operator==(const JumpCandidate&) const = default;
};

// The oracle jump first, followed by any other boundary whose magnitude is
// equal at the rendered precision.
struct JumpTruth {
  std::vector<JumpCandidate> candidates;

  const JumpCandidate& best() const { return candidates.front(); }
  bool operator==(const JumpTruth&) const = default;
};

JumpTruth jump_truth(const gam::GraphTerm& term, int decimals);

using Truth = std::variant<double, MonotonicityClass, JumpTruth>;

struct GradeOptions {
  // Precision of the graph shown to the model.
  int decimals = 3;
};

struct CaseVerdict {
  std::size_t index = 0;
  std::string graph_id;
  // "original" or "inverted".
  std::string variant = "original";
  prompt::TaskKind task;
  Truth truth;
  std::string question;
  // Assistant replies in turn order; the last one is graded.
  std::vector<std::string> responses;
  std::string llm_answer;
  std::optional<std::string> parsed_answer;
  bool correct = false;
  bool unparseable = false;
  std::optional<std::string> error;
  std::optional<int> attempts;
  std::optional<double> near_monotonicity;
};

// Final decimal number of the response. Numbers inside interval notation
// "(a, b)" only count when no standalone number exists.
std::optional<double> parse_numeric_answer(std::string_view response);

// Every decimal number in the response, in order.
std::vector<double> extract_numbers(std::string_view response);

// Last classification phrase of the response ("not monotone",
// "monotone decreasing", "constant", ...).
std::optional<MonotonicityClass> parse_monotonicity_answer(
    std::string_view response);

// Fills truth, llm_answer, parsed_answer, correct and unparseable.
CaseVerdict grade_case(const prompt::TaskKind& task, const Truth& truth,
                       std::string_view response, const GradeOptions& opts = {});

// A response a perfect reader would give; grade_case accepts it.
std::string render_truth(const Truth& truth, const GradeOptions& opts = {});

}  // namespace gamtalk::eval
