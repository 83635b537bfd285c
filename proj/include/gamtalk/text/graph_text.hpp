#pragma once

#include <string>

#include "gamtalk/gam/types.hpp"

namespace gamtalk::text {

struct RenderOptions {
  int decimals = 3;
  bool include_ci = true;
  bool include_weights = false;

  void validate() const;
};

// Canonical textual form of one graph:
//
//   Feature Name: <name>
//
//   Feature Type: continuous|categorical|boolean
//
//   Means: {"(lo, hi)": value, ...}
//
//   Lower Bounds (95%-Confidence Interval): {...}
//
//   Upper Bounds (95%-Confidence Interval): {...}
//
// with an optional trailing "Weights: {...}" block. Continuous keys are
// "(lo, hi)" intervals, categorical keys are the raw labels. No trailing
// newline.
struct GraphText {
  std::string text;

  bool operator==(const GraphText&) const = default;
};

GraphText render_graph_text(const gam::GraphTerm& term,
                            const RenderOptions& opts = {});

// Inverse of render_graph_text. Missing CI blocks are restored as the means,
// a missing Weights block as weight 1 per bin. Throws Error(kParse) on
// malformed keys, mismatched axes between blocks, or gaps/overlaps between
// consecutive intervals.
gam::GraphTerm parse_graph_text(const GraphText& text);

// The term with every real rounded the way render_graph_text prints it.
// Weights become 1 unless opts.include_weights is set; CI bounds collapse to
// the means unless opts.include_ci is set.
gam::GraphTerm round_term(const gam::GraphTerm& term, const RenderOptions& opts);

// Text of one key-value object, e.g. {"(2.0, 2.5)": -0.308}.
std::string render_object(const gam::GraphTerm& term,
                          const std::vector<double>& values, int decimals);

}  // namespace gamtalk::text
