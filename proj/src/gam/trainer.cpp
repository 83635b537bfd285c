#include "gamtalk/gam/trainer.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <future>
#include <numeric>
#include <set>

#include "gamtalk/error.hpp"
#include "gamtalk/gam/model.hpp"
#include "gamtalk/random.hpp"

namespace gamtalk::gam {
namespace {

constexpr double kMinHessian = 1e-12;
constexpr std::size_t kMinSamplesLeaf = 2;
constexpr double kZ95 = 1.96;

struct BinnedFeature {
  std::string name;
  FeatureKind kind = FeatureKind::kContinuous;
  std::vector<double> edges;
  std::vector<std::string> labels;
  std::vector<std::uint32_t> bin_of_row;
  std::vector<double> counts;  // full-table rows per bin

  std::size_t bins() const {
    return kind == FeatureKind::kContinuous ? edges.size() - 1 : labels.size();
  }
};

std::string lower(std::string s) {
  for (char& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

bool looks_boolean(const std::vector<std::string>& labels) {
  if (labels.size() != 2) return false;
  std::set<std::string> pair{lower(labels[0]), lower(labels[1])};
  return pair == std::set<std::string>{"false", "true"} ||
         pair == std::set<std::string>{"no", "yes"};
}

BinnedFeature bin_column(const Column& column, int max_bins) {
  BinnedFeature f;
  f.name = column.name;
  const std::size_t rows = column.size();
  f.bin_of_row.resize(rows);
  if (column.is_numeric()) {
    const auto& values = column.numeric();
    for (double v : values) {
      if (!std::isfinite(v)) {
        throw Error(ErrorCode::kInvalidArgument,
                    "column '" + column.name + "' has a non-finite value");
      }
    }
    f.kind = FeatureKind::kContinuous;
    f.edges = quantile_edges(values, max_bins);
    GraphTerm probe;
    probe.kind = FeatureKind::kContinuous;
    probe.edges = f.edges;
    for (std::size_t r = 0; r < rows; ++r) {
      bool clamped = false;
      f.bin_of_row[r] =
          static_cast<std::uint32_t>(clamped_bin(probe, values[r], &clamped));
    }
  } else {
    const auto& values = column.text();
    std::set<std::string> distinct(values.begin(), values.end());
    if (distinct.count("") != 0) {
      throw Error(ErrorCode::kInvalidArgument,
                  "column '" + column.name + "' has an empty category label");
    }
    f.labels.assign(distinct.begin(), distinct.end());
    f.kind = looks_boolean(f.labels) ? FeatureKind::kBoolean
                                     : FeatureKind::kCategorical;
    for (std::size_t r = 0; r < rows; ++r) {
      auto it = std::lower_bound(f.labels.begin(), f.labels.end(), values[r]);
      f.bin_of_row[r] = static_cast<std::uint32_t>(it - f.labels.begin());
    }
  }
  f.counts.assign(f.bins(), 0.0);
  for (auto bin : f.bin_of_row) f.counts[bin] += 1.0;
  return f;
}

double sigmoid(double s) { return 1.0 / (1.0 + std::exp(-s)); }

double mean_loss(Link link, const std::vector<double>& scores,
                 const std::vector<double>& y) {
  double total = 0.0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (link == Link::kIdentity) {
      const double r = y[i] - scores[i];
      total += 0.5 * r * r;
    } else {
      // log(1 + exp(s)) - y s, written to avoid overflow.
      const double s = scores[i];
      const double softplus =
          s > 0 ? s + std::log1p(std::exp(-s)) : std::log1p(std::exp(s));
      total += softplus - y[i] * s;
    }
  }
  return scores.empty() ? 0.0 : total / static_cast<double>(scores.size());
}

struct Segment {
  std::size_t begin;
  std::size_t end;  // exclusive, positions in the bin order
};

struct SplitChoice {
  double gain = 0.0;
  std::size_t segment = 0;
  std::size_t cut = 0;  // first position of the right half
};

// Greedy partition of the ordered bins into at most `max_leaves` contiguous
// segments maximizing the Newton gain.
std::vector<Segment> grow_segments(const std::vector<std::size_t>& order,
                                   const std::vector<double>& grad,
                                   const std::vector<double>& hess,
                                   const std::vector<double>& count,
                                   int max_leaves) {
  const std::size_t n = order.size();
  std::vector<double> pg(n + 1, 0.0), ph(n + 1, 0.0), pc(n + 1, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    pg[i + 1] = pg[i] + grad[order[i]];
    ph[i + 1] = ph[i] + hess[order[i]];
    pc[i + 1] = pc[i] + count[order[i]];
  }
  auto score = [&](std::size_t b, std::size_t e) {
    const double g = pg[e] - pg[b];
    const double h = ph[e] - ph[b];
    return h > kMinHessian ? g * g / h : 0.0;
  };
  std::vector<Segment> segments{{0, n}};
  for (int leaves = 1; leaves < max_leaves; ++leaves) {
    SplitChoice best;
    for (std::size_t s = 0; s < segments.size(); ++s) {
      const auto [b, e] = segments[s];
      const double parent = score(b, e);
      for (std::size_t cut = b + 1; cut < e; ++cut) {
        if (pc[cut] - pc[b] < kMinSamplesLeaf ||
            pc[e] - pc[cut] < kMinSamplesLeaf) {
          continue;
        }
        const double gain = score(b, cut) + score(cut, e) - parent;
        if (gain > best.gain) best = {gain, s, cut};
      }
    }
    if (!(best.gain > 0.0)) break;
    const Segment old = segments[best.segment];
    segments[best.segment] = {old.begin, best.cut};
    segments.insert(segments.begin() + static_cast<std::ptrdiff_t>(best.segment) + 1,
                    Segment{best.cut, old.end});
  }
  return segments;
}

struct BagResult {
  double intercept = 0.0;
  std::vector<std::vector<double>> shapes;  // per feature, per bin
};

BagResult fit_bag(const std::vector<BinnedFeature>& features,
                  const std::vector<double>& y, Link link,
                  const FitConfig& config, std::size_t bag) {
  const std::size_t rows = y.size();
  Rng rng(Rng::mix(config.random_seed) ^ Rng::mix(bag + 1));

  std::vector<std::size_t> perm(rows);
  std::iota(perm.begin(), perm.end(), 0);
  for (std::size_t i = rows - 1; i > 0; --i) {
    std::swap(perm[i], perm[rng.index(i + 1)]);
  }
  auto n_val = static_cast<std::size_t>(
      std::llround(config.validation_fraction * static_cast<double>(rows)));
  n_val = std::clamp<std::size_t>(n_val, 1, rows - 1);
  std::vector<std::size_t> val_rows(perm.begin(), perm.begin() + static_cast<std::ptrdiff_t>(n_val));
  std::vector<std::size_t> train_rows(perm.begin() + static_cast<std::ptrdiff_t>(n_val), perm.end());
  std::sort(val_rows.begin(), val_rows.end());
  std::sort(train_rows.begin(), train_rows.end());

  std::vector<double> y_train, y_val;
  for (auto r : train_rows) y_train.push_back(y[r]);
  for (auto r : val_rows) y_val.push_back(y[r]);

  double base = std::accumulate(y_train.begin(), y_train.end(), 0.0) /
                static_cast<double>(y_train.size());
  if (link == Link::kLogit) {
    const double p = std::clamp(base, 1e-12, 1.0 - 1e-12);
    base = std::log(p / (1.0 - p));
  }

  std::vector<double> s_train(train_rows.size(), base);
  std::vector<double> s_val(val_rows.size(), base);

  BagResult current;
  current.intercept = base;
  for (const auto& f : features) current.shapes.emplace_back(f.bins(), 0.0);
  double best_loss = mean_loss(link, s_val, y_val);
  int stalled = 0;

  std::vector<double> grad, hess, count, leaf_value;
  std::vector<std::size_t> order;
  for (int round = 0; round < config.boosting_rounds; ++round) {
    for (std::size_t fi = 0; fi < features.size(); ++fi) {
      const BinnedFeature& f = features[fi];
      const std::size_t bins = f.bins();
      if (bins < 2) continue;
      grad.assign(bins, 0.0);
      hess.assign(bins, 0.0);
      count.assign(bins, 0.0);
      for (std::size_t i = 0; i < train_rows.size(); ++i) {
        const auto bin = f.bin_of_row[train_rows[i]];
        if (link == Link::kIdentity) {
          grad[bin] += y_train[i] - s_train[i];
          hess[bin] += 1.0;
        } else {
          const double p = sigmoid(s_train[i]);
          grad[bin] += y_train[i] - p;
          hess[bin] += p * (1.0 - p);
        }
        count[bin] += 1.0;
      }
      order.resize(bins);
      std::iota(order.begin(), order.end(), 0);
      if (f.kind != FeatureKind::kContinuous) {
        auto ratio = [&](std::size_t b) {
          return hess[b] > kMinHessian ? grad[b] / hess[b] : 0.0;
        };
        std::stable_sort(order.begin(), order.end(),
                         [&](std::size_t a, std::size_t b) {
                           return ratio(a) < ratio(b);
                         });
      }
      const auto segments =
          grow_segments(order, grad, hess, count, config.max_leaves);
      if (segments.size() < 2) continue;
      leaf_value.assign(bins, 0.0);
      for (const auto& seg : segments) {
        double g = 0.0;
        double h = 0.0;
        for (std::size_t k = seg.begin; k < seg.end; ++k) {
          g += grad[order[k]];
          h += hess[order[k]];
        }
        const double step =
            h > kMinHessian ? config.learning_rate * g / h : 0.0;
        for (std::size_t k = seg.begin; k < seg.end; ++k) {
          leaf_value[order[k]] = step;
        }
      }
      auto& shape = current.shapes[fi];
      for (std::size_t b = 0; b < bins; ++b) shape[b] += leaf_value[b];
      for (std::size_t i = 0; i < train_rows.size(); ++i) {
        s_train[i] += leaf_value[f.bin_of_row[train_rows[i]]];
      }
      for (std::size_t i = 0; i < val_rows.size(); ++i) {
        s_val[i] += leaf_value[f.bin_of_row[val_rows[i]]];
      }
    }
    // Training stops once the validation loss has not improved by more than
    // the tolerance for `early_stopping_rounds` rounds; the model at that
    // point is kept.
    const double loss = mean_loss(link, s_val, y_val);
    if (loss < best_loss - config.early_stopping_tolerance) {
      best_loss = loss;
      stalled = 0;
    } else if (++stalled >= config.early_stopping_rounds) {
      break;
    }
  }
  return current;
}

// Subtracts the count-weighted mean of `shape`, returning it.
double center(std::vector<double>& shape, const std::vector<double>& counts) {
  double num = 0.0;
  double den = 0.0;
  for (std::size_t b = 0; b < shape.size(); ++b) {
    num += counts[b] * shape[b];
    den += counts[b];
  }
  const double offset = den > 0.0 ? num / den : 0.0;
  for (double& v : shape) v -= offset;
  return offset;
}

Link resolve_link(const Table& table, const FitConfig& config) {
  const bool binary = std::all_of(table.target.begin(), table.target.end(),
                                  [](double v) { return v == 0.0 || v == 1.0; });
  const Link link = config.link.value_or(binary ? Link::kLogit : Link::kIdentity);
  if (link == Link::kLogit) {
    if (!binary) {
      throw Error(ErrorCode::kInvalidArgument,
                  "logit link requires a 0/1 target");
    }
    const bool has0 = std::find(table.target.begin(), table.target.end(), 0.0) != table.target.end();
    const bool has1 = std::find(table.target.begin(), table.target.end(), 1.0) != table.target.end();
    if (!has0 || !has1) {
      throw Error(ErrorCode::kInvalidArgument,
                  "logit link requires both classes in the target");
    }
  }
  return link;
}

}  // namespace

std::vector<double> quantile_edges(std::span<const double> values,
                                   int max_bins) {
  if (values.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "cannot bin an empty column");
  }
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  std::vector<double> distinct = sorted;
  distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());

  if (distinct.size() == 1) return {distinct[0] - 0.5, distinct[0] + 0.5};

  std::vector<double> edges{distinct.front()};
  auto midpoint_above = [&](double v) {
    auto it = std::upper_bound(distinct.begin(), distinct.end(), v);
    return (v + *it) / 2.0;
  };
  if (distinct.size() <= static_cast<std::size_t>(max_bins)) {
    for (std::size_t i = 0; i + 1 < distinct.size(); ++i) {
      edges.push_back((distinct[i] + distinct[i + 1]) / 2.0);
    }
  } else {
    const std::size_t n = sorted.size();
    for (int j = 1; j < max_bins; ++j) {
      const std::size_t pos = static_cast<std::size_t>(j) * n /
                              static_cast<std::size_t>(max_bins);
      const double a = sorted[pos - 1];
      const double b = sorted[pos];
      double cut;
      if (a < b) {
        cut = (a + b) / 2.0;
      } else if (a < distinct.back()) {
        cut = midpoint_above(a);
      } else {
        continue;
      }
      if (cut > edges.back()) edges.push_back(cut);
    }
  }
  if (distinct.back() > edges.back()) {
    edges.push_back(distinct.back());
  }
  return edges;
}

GamModel fit_gam(const Table& table, const FitConfig& config) {
  config.validate();
  table.validate();
  if (table.features.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "table has no feature columns");
  }
  if (table.row_count() < 20) {
    throw Error(ErrorCode::kInvalidArgument,
                "table needs at least 20 rows, got " +
                    std::to_string(table.row_count()));
  }
  for (double v : table.target) {
    if (!std::isfinite(v)) {
      throw Error(ErrorCode::kInvalidArgument, "target has non-finite values");
    }
  }
  const Link link = resolve_link(table, config);

  std::vector<BinnedFeature> features;
  features.reserve(table.features.size());
  for (const auto& column : table.features) {
    features.push_back(bin_column(column, config.max_bins));
  }

  const auto bags = static_cast<std::size_t>(config.outer_bags);
  std::vector<std::future<BagResult>> pending;
  pending.reserve(bags);
  for (std::size_t b = 0; b < bags; ++b) {
    pending.push_back(std::async(std::launch::async, fit_bag,
                                 std::cref(features), std::cref(table.target),
                                 link, std::cref(config), b));
  }
  std::vector<BagResult> results;
  results.reserve(bags);
  for (auto& p : pending) results.push_back(p.get());

  for (auto& r : results) {
    for (std::size_t fi = 0; fi < features.size(); ++fi) {
      r.intercept += center(r.shapes[fi], features[fi].counts);
    }
  }

  GamModel model;
  model.link = link;
  for (const auto& r : results) model.intercept += r.intercept;
  model.intercept /= static_cast<double>(bags);

  for (std::size_t fi = 0; fi < features.size(); ++fi) {
    const BinnedFeature& f = features[fi];
    const std::size_t bins = f.bins();
    GraphTerm term;
    term.feature_name = f.name;
    term.kind = f.kind;
    term.edges = f.edges;
    term.labels = f.labels;
    term.weights = f.counts;
    term.means.assign(bins, 0.0);
    for (const auto& r : results) {
      for (std::size_t b = 0; b < bins; ++b) term.means[b] += r.shapes[fi][b];
    }
    for (double& m : term.means) m /= static_cast<double>(bags);
    model.intercept += center(term.means, f.counts);

    std::vector<double> half_width(bins, 0.0);
    if (bags > 1) {
      for (std::size_t b = 0; b < bins; ++b) {
        double ss = 0.0;
        // Bag shapes are centered; compare against the pre-recentering mean.
        double bag_mean = 0.0;
        for (const auto& r : results) bag_mean += r.shapes[fi][b];
        bag_mean /= static_cast<double>(bags);
        for (const auto& r : results) {
          const double d = r.shapes[fi][b] - bag_mean;
          ss += d * d;
        }
        const double sd = std::sqrt(ss / static_cast<double>(bags - 1));
        half_width[b] = kZ95 * sd / std::sqrt(static_cast<double>(bags));
      }
    }
    term.lower_ci.resize(bins);
    term.upper_ci.resize(bins);
    for (std::size_t b = 0; b < bins; ++b) {
      term.lower_ci[b] = term.means[b] - half_width[b];
      term.upper_ci[b] = term.means[b] + half_width[b];
    }
    model.importances.push_back(weighted_importance(term));
    model.terms.push_back(std::move(term));
  }
  model.target_description =
      link == Link::kLogit ? "the log-odds that " + table.target_name + " is 1"
                           : "the predicted value of " + table.target_name;
  return model;
}

}  // namespace gamtalk::gam
