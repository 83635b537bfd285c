#pragma once

#include <span>
#include <vector>

#include "gamtalk/gam/table.hpp"
#include "gamtalk/gam/types.hpp"

namespace gamtalk::gam {

// Cyclic gradient boosting over histogram bins, one small tree per feature and
// round, repeated over `outer_bags` random train/validation splits. The
// returned terms are centered (weighted by training counts) with the offsets
// folded into the intercept. CI bounds are bag mean +- 1.96 bag standard
// errors. Identical inputs give bit-identical models.
GamModel fit_gam(const Table& table, const FitConfig& config);

// Bin edges for a numeric column: one bin per distinct value when there are at
// most `max_bins` of them, otherwise cuts near the sample quantiles. Interior
// cuts sit halfway between adjacent distinct values. A constant column yields
// the single bin [v - 0.5, v + 0.5].
std::vector<double> quantile_edges(std::span<const double> values,
                                   int max_bins);

}  // namespace gamtalk::gam
