#pragma once

#include <cstddef>

#include "gamtalk/gam/types.hpp"
#include "gamtalk/text/graph_text.hpp"
#include "gamtalk/text/tokens.hpp"

namespace gamtalk::text {

struct SimplifyResult {
  gam::GraphTerm term;
  // Largest |mean difference| of any pair merged. The weighted mean absolute
  // deviation between the simplified and original graph never exceeds it.
  double max_merge_gap = 0.0;
  std::size_t merges = 0;
  std::size_t tokens = 0;
};

// Greedily merges adjacent bins of a continuous term until its rendering
// costs at most `budget` tokens. Each step merges the adjacent pair with the
// smallest |mean difference| (leftmost on ties); the merged bin takes the
// weight-averaged mean, the envelope [min lower, max upper] of the CI and the
// summed weight. Categorical terms are never merged. Throws
// Error(kInvalidArgument) when the budget is unreachable.
SimplifyResult simplify_graph(const gam::GraphTerm& term, std::size_t budget,
                              const TokenEstimator& estimator = {},
                              const RenderOptions& opts = {});

}  // namespace gamtalk::text
