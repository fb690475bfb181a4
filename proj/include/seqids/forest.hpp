#pragma once

// Random-forest classifier with Gini splits, used both as a per-step action
// predictor and as the attribute ranker in preprocessing.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "seqids/rng.hpp"
#include "seqids/types.hpp"

namespace seqids {

struct ForestConfig {
  std::size_t num_trees = 100;
  std::optional<std::size_t> max_features;  // default ceil(sqrt(d))
  bool bootstrap = true;
  std::size_t min_samples_split = 2;
  std::optional<std::size_t> max_depth;  // unlimited when empty
  std::uint64_t seed = 0;
};

struct TreeNode {
  int feature = -1;  // -1 marks a leaf
  double threshold = 0.0;
  int left = -1;
  int right = -1;
  std::vector<std::uint32_t> class_counts;  // training samples reaching the node

  bool is_leaf() const { return feature < 0; }
};

struct DecisionTree {
  std::vector<TreeNode> nodes;  // nodes[0] is the root

  const TreeNode& leaf_for(std::span<const double> x) const {
    std::size_t i = 0;
    while (!nodes[i].is_leaf()) {
      const TreeNode& n = nodes[i];
      i = static_cast<std::size_t>(x[static_cast<std::size_t>(n.feature)] <= n.threshold ? n.left
                                                                                         : n.right);
    }
    return nodes[i];
  }

  /// Majority class of the leaf reached by x; ties go to the lowest class.
  std::size_t predict(std::span<const double> x) const {
    const auto& counts = leaf_for(x).class_counts;
    return static_cast<std::size_t>(
        std::distance(counts.begin(), std::max_element(counts.begin(), counts.end())));
  }
};

struct ForestModel {
  std::size_t num_features = 0;
  std::size_t num_classes = 0;
  std::vector<std::string> attributes;
  std::vector<DecisionTree> trees;
  // Sample-weighted Gini decrease per attribute, normalized within each tree
  // and averaged over trees.
  std::vector<double> impurity_decrease;
};

namespace detail {

inline double gini(std::span<const std::uint32_t> counts, double total) {
  if (total <= 0.0) return 0.0;
  double s = 0.0;
  for (auto c : counts) {
    double p = c / total;
    s += p * p;
  }
  return 1.0 - s;
}

struct SplitChoice {
  int feature = -1;
  double threshold = 0.0;
  double child_impurity = 0.0;  // weighted sum of child Gini values
};

class TreeGrower {
public:
  TreeGrower(const std::vector<std::vector<double>>& x, std::span<const std::size_t> y,
             std::size_t num_classes, std::size_t max_features, const ForestConfig& config,
             Rng& rng)
      : x_(x), y_(y), classes_(num_classes), max_features_(max_features), config_(config),
        rng_(rng) {}

  // Grows a tree over the given sample indices (duplicates allowed). Adds the
  // tree's raw impurity decrease per feature into `importance`.
  DecisionTree grow(std::vector<std::size_t> samples, std::vector<double>& importance) {
    DecisionTree tree;
    const double root_n = static_cast<double>(samples.size());
    struct Pending {
      std::size_t node;
      std::vector<std::size_t> samples;
      std::size_t depth;
    };
    std::vector<Pending> stack;
    tree.nodes.emplace_back();
    stack.push_back({0, std::move(samples), 0});

    const std::size_t d = x_.empty() ? 0 : x_[0].size();
    std::vector<std::size_t> features(d);

    while (!stack.empty()) {
      Pending job = std::move(stack.back());
      stack.pop_back();
      auto counts = count_classes(job.samples);
      const double n = static_cast<double>(job.samples.size());
      const double impurity = gini(counts, n);
      tree.nodes[job.node].class_counts = counts;

      const bool depth_ok = !config_.max_depth || job.depth < *config_.max_depth;
      if (impurity <= 0.0 || job.samples.size() < config_.min_samples_split || !depth_ok)
        continue;

      std::iota(features.begin(), features.end(), std::size_t{0});
      std::shuffle(features.begin(), features.end(), rng_);
      SplitChoice best;
      // Keep drawing past max_features until at least one valid split exists.
      for (std::size_t k = 0; k < d; ++k) {
        if (k >= max_features_ && best.feature >= 0) break;
        try_feature(features[k], job.samples, counts, best);
      }
      if (best.feature < 0) continue;

      std::vector<std::size_t> left, right;
      const auto f = static_cast<std::size_t>(best.feature);
      for (std::size_t s : job.samples) (x_[s][f] <= best.threshold ? left : right).push_back(s);

      importance[f] += (n / root_n) * (impurity - best.child_impurity);

      const auto li = static_cast<int>(tree.nodes.size());
      tree.nodes.emplace_back();
      const auto ri = static_cast<int>(tree.nodes.size());
      tree.nodes.emplace_back();
      auto& node = tree.nodes[job.node];
      node.feature = best.feature;
      node.threshold = best.threshold;
      node.left = li;
      node.right = ri;
      stack.push_back({static_cast<std::size_t>(ri), std::move(right), job.depth + 1});
      stack.push_back({static_cast<std::size_t>(li), std::move(left), job.depth + 1});
    }
    return tree;
  }

private:
  std::vector<std::uint32_t> count_classes(const std::vector<std::size_t>& samples) const {
    std::vector<std::uint32_t> counts(classes_, 0);
    for (std::size_t s : samples) ++counts[y_[s]];
    return counts;
  }

  void try_feature(std::size_t f, const std::vector<std::size_t>& samples,
                   const std::vector<std::uint32_t>& total_counts, SplitChoice& best) {
    order_.assign(samples.begin(), samples.end());
    std::sort(order_.begin(), order_.end(),
              [&](std::size_t a, std::size_t b) { return x_[a][f] < x_[b][f]; });
    if (x_[order_.front()][f] == x_[order_.back()][f]) return;

    const double n = static_cast<double>(order_.size());
    std::vector<std::uint32_t> left(classes_, 0), right(total_counts);
    for (std::size_t i = 0; i + 1 < order_.size(); ++i) {
      const std::size_t c = y_[order_[i]];
      ++left[c];
      --right[c];
      const double v = x_[order_[i]][f];
      const double next = x_[order_[i + 1]][f];
      if (v == next) continue;
      const double nl = static_cast<double>(i + 1);
      const double nr = n - nl;
      const double child = (nl / n) * gini(left, nl) + (nr / n) * gini(right, nr);
      if (best.feature < 0 || child < best.child_impurity) {
        best.feature = static_cast<int>(f);
        best.child_impurity = child;
        best.threshold = v + (next - v) / 2.0;
        // Guard against the midpoint rounding up to `next`.
        if (!(best.threshold < next)) best.threshold = v;
      }
    }
  }

  const std::vector<std::vector<double>>& x_;
  std::span<const std::size_t> y_;
  std::size_t classes_;
  std::size_t max_features_;
  const ForestConfig& config_;
  Rng& rng_;
  std::vector<std::size_t> order_;
};

}  // namespace detail

/// Trains a forest on rows `x` with labels `y` in [0, num_classes). When
/// num_classes is 0 it is inferred as max(y) + 1.
inline ForestModel forest_train(const ForestConfig& config,
                                const std::vector<std::vector<double>>& x,
                                std::span<const std::size_t> y, std::size_t num_classes = 0,
                                std::vector<std::string> attributes = {}) {
  if (x.empty()) throw DataError("forest_train: no samples");
  if (x.size() != y.size()) throw DataError("forest_train: feature/label count mismatch");
  if (config.num_trees < 1) throw ConfigError("forest needs at least one tree");
  const std::size_t d = x[0].size();
  if (d == 0) throw DataError("forest_train: samples have no attributes");
  for (const auto& row : x)
    if (row.size() != d) throw DataError("forest_train: ragged sample matrix");

  const std::size_t max_label = *std::max_element(y.begin(), y.end());
  if (num_classes == 0) num_classes = max_label + 1;
  if (max_label >= num_classes) throw DataError("forest_train: label out of range");

  std::size_t max_features =
      config.max_features.value_or(static_cast<std::size_t>(std::ceil(std::sqrt(double(d)))));
  if (max_features < 1 || max_features > d)
    throw ConfigError("max_features must lie in [1, " + std::to_string(d) + "]");

  ForestModel model;
  model.num_features = d;
  model.num_classes = num_classes;
  model.attributes = std::move(attributes);
  if (!model.attributes.empty() && model.attributes.size() != d)
    throw DataError("forest_train: attribute manifest size mismatch");
  model.impurity_decrease.assign(d, 0.0);

  Rng rng = make_stream(config.seed, StreamTag::ActionForest);
  detail::TreeGrower grower(x, y, num_classes, max_features, config, rng);
  std::uniform_int_distribution<std::size_t> pick(0, x.size() - 1);
  std::size_t contributing = 0;
  for (std::size_t t = 0; t < config.num_trees; ++t) {
    std::vector<std::size_t> samples(x.size());
    if (config.bootstrap)
      for (auto& s : samples) s = pick(rng);
    else
      std::iota(samples.begin(), samples.end(), std::size_t{0});

    std::vector<double> tree_importance(d, 0.0);
    model.trees.push_back(grower.grow(std::move(samples), tree_importance));
    const double total = std::accumulate(tree_importance.begin(), tree_importance.end(), 0.0);
    if (total > 0.0) {
      ++contributing;
      for (std::size_t f = 0; f < d; ++f) model.impurity_decrease[f] += tree_importance[f] / total;
    }
  }
  if (contributing > 0)
    for (auto& v : model.impurity_decrease) v /= static_cast<double>(contributing);
  return model;
}

/// Majority vote over the trees; ties go to the lowest class index.
inline std::size_t forest_predict(const ForestModel& model, std::span<const double> x) {
  if (x.size() != model.num_features)
    throw DataError("forest_predict: expected " + std::to_string(model.num_features) +
                    " attributes, got " + std::to_string(x.size()));
  std::vector<std::size_t> votes(model.num_classes, 0);
  for (const auto& tree : model.trees) ++votes[tree.predict(x)];
  return static_cast<std::size_t>(
      std::distance(votes.begin(), std::max_element(votes.begin(), votes.end())));
}

/// Independent per-step prediction, no temporal coupling.
inline ActionSequence forest_predict_sequence(const ForestModel& model,
                                              const std::vector<std::vector<double>>& window) {
  ActionSequence out;
  out.reserve(window.size());
  for (const auto& step : window) out.push_back(action_at(forest_predict(model, step)));
  return out;
}

struct ScoredAttribute {
  std::string attribute;
  double score = 0.0;
};

/// Normalized mean decrease in Gini impurity, in manifest order. All zeros
/// when no tree ever split.
inline std::vector<ScoredAttribute> feature_importances(const ForestModel& model) {
  std::vector<ScoredAttribute> out;
  const double total =
      std::accumulate(model.impurity_decrease.begin(), model.impurity_decrease.end(), 0.0);
  for (std::size_t f = 0; f < model.num_features; ++f) {
    std::string name = f < model.attributes.size() ? model.attributes[f] : "x" + std::to_string(f);
    out.push_back({std::move(name), total > 0.0 ? model.impurity_decrease[f] / total : 0.0});
  }
  return out;
}

}  // namespace seqids
