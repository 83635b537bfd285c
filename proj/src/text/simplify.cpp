#include "gamtalk/text/simplify.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "gamtalk/error.hpp"

namespace gamtalk::text {
namespace {

std::size_t cost(const gam::GraphTerm& term, const TokenEstimator& estimator,
                 const RenderOptions& opts) {
  return estimator.count(render_graph_text(term, opts).text);
}

void merge_pair(gam::GraphTerm& t, std::size_t i) {
  const double w = t.weights[i] + t.weights[i + 1];
  const auto [lo, hi] = std::minmax(t.means[i], t.means[i + 1]);
  // Rounding can push the average just outside the pair; keep it between.
  const double mean = std::clamp(
      w > 0.0 ? (t.weights[i] * t.means[i] + t.weights[i + 1] * t.means[i + 1]) / w
              : 0.5 * (t.means[i] + t.means[i + 1]),
      lo, hi);
  t.means[i] = mean;
  t.lower_ci[i] = std::min({t.lower_ci[i], t.lower_ci[i + 1], mean});
  t.upper_ci[i] = std::max({t.upper_ci[i], t.upper_ci[i + 1], mean});
  t.weights[i] = w;
  auto erase_at = [](auto& v, std::size_t k) {
    v.erase(v.begin() + static_cast<std::ptrdiff_t>(k));
  };
  erase_at(t.means, i + 1);
  erase_at(t.lower_ci, i + 1);
  erase_at(t.upper_ci, i + 1);
  erase_at(t.weights, i + 1);
  erase_at(t.edges, i + 1);
}

}  // namespace

SimplifyResult simplify_graph(const gam::GraphTerm& term, std::size_t budget,
                              const TokenEstimator& estimator,
                              const RenderOptions& opts) {
  term.validate();
  SimplifyResult result{term, 0.0, 0, cost(term, estimator, opts)};
  if (result.tokens <= budget) return result;

  if (!term.is_continuous()) {
    throw Error(ErrorCode::kInvalidArgument,
                "budget of " + std::to_string(budget) +
                    " tokens is below the cost of categorical graph '" +
                    term.feature_name + "' (" + std::to_string(result.tokens) +
                    "), and categorical bins are never merged");
  }

  gam::GraphTerm& t = result.term;
  while (result.tokens > budget) {
    if (t.bin_count() == 1) {
      throw Error(ErrorCode::kInvalidArgument,
                  "budget of " + std::to_string(budget) +
                      " tokens is unreachable for graph '" + term.feature_name +
                      "' even with a single bin");
    }
    std::size_t best = 0;
    double best_gap = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i + 1 < t.bin_count(); ++i) {
      const double gap = std::abs(t.means[i + 1] - t.means[i]);
      if (gap < best_gap) {
        best_gap = gap;
        best = i;
      }
    }
    merge_pair(t, best);
    result.max_merge_gap = std::max(result.max_merge_gap, best_gap);
    ++result.merges;
    result.tokens = cost(t, estimator, opts);
  }
  return result;
}

}  // namespace gamtalk::text
